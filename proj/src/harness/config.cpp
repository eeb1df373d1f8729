#include <ddea/harness/config.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include <ddea/benchmarks.hpp>
#include <ddea/harness/report_io.hpp>

namespace ddea::harness {

std::string algorithm_name(Algorithm a)
{
    return a == Algorithm::dea ? "DEA" : "DDEA";
}

Algorithm parse_algorithm(const std::string& name, const std::string& field)
{
    if (name == "DEA" || name == "dea")
        return Algorithm::dea;
    if (name == "DDEA" || name == "ddea")
        return Algorithm::ddea;
    throw ConfigError("unknown algorithm '" + name + "' (expected DEA or DDEA)", field);
}

namespace {

    /// Reads one JSON object, tracking which keys were consumed.
    class ObjectReader {
    public:
        ObjectReader(const json& j, std::string path) : _j(j), _path(std::move(path))
        {
            if (!_j.is_object())
                throw ConfigError("expected an object", _path.empty() ? "<root>" : _path);
        }

        std::string field(const std::string& key) const { return _path.empty() ? key : _path + "." + key; }

        const json* take(const std::string& key)
        {
            auto it = _j.find(key);
            if (it == _j.end())
                return nullptr;
            _seen.insert(key);
            return &*it;
        }

        double number(const std::string& key, double fallback)
        {
            const json* v = take(key);
            if (!v)
                return fallback;
            if (!v->is_number())
                throw ConfigError("expected a number", field(key));
            return v->get<double>();
        }

        std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback)
        {
            const json* v = take(key);
            if (!v)
                return fallback;
            if (!v->is_number_unsigned())
                throw ConfigError("expected a non-negative integer", field(key));
            return v->get<std::uint64_t>();
        }

        bool boolean(const std::string& key, bool fallback)
        {
            const json* v = take(key);
            if (!v)
                return fallback;
            if (!v->is_boolean())
                throw ConfigError("expected true or false", field(key));
            return v->get<bool>();
        }

        std::string string(const std::string& key, const std::string& fallback)
        {
            const json* v = take(key);
            if (!v)
                return fallback;
            if (!v->is_string())
                throw ConfigError("expected a string", field(key));
            return v->get<std::string>();
        }

        void finish() const
        {
            for (const auto& [key, _] : _j.items())
                if (!_seen.count(key))
                    throw ConfigError("unknown key", field(key));
        }

    private:
        const json& _j;
        std::string _path;
        std::set<std::string> _seen;
    };

    std::vector<double> number_or_array(ObjectReader& r, const std::string& key, std::vector<double> fallback)
    {
        const json* v = r.take(key);
        if (!v)
            return fallback;
        if (v->is_number())
            return {v->get<double>()};
        if (!v->is_array() || v->empty())
            throw ConfigError("expected a number or a non-empty array of numbers", r.field(key));
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number())
                throw ConfigError("expected a number or a non-empty array of numbers", r.field(key));
            out.push_back(e.get<double>());
        }
        return out;
    }

    json number_or_array(const std::vector<double>& v)
    {
        return v.size() == 1 ? json(v.front()) : json(v);
    }

    ControlParams<double> parse_control(const json* j, const std::string& path)
    {
        ControlParams<double> c;
        if (!j)
            return c;
        ObjectReader r(*j, path);
        c.population_size = r.unsigned_int("population_size", c.population_size);
        c.f_weight = r.number("f_weight", c.f_weight);
        c.crossover_rate = r.number("crossover_rate", c.crossover_rate);
        c.force_one_gene = r.boolean("force_one_gene", c.force_one_gene);
        c.exclude_target = r.boolean("exclude_target", c.exclude_target);
        c.clamp = r.boolean("clamp", c.clamp);
        r.finish();
        c.validate();
        return c;
    }

    json control_json(const ControlParams<double>& c)
    {
        return {{"population_size", c.population_size}, {"f_weight", c.f_weight},
                {"crossover_rate", c.crossover_rate},   {"force_one_gene", c.force_one_gene},
                {"exclude_target", c.exclude_target},   {"clamp", c.clamp}};
    }

    DivergenceParams<double> parse_ddea(const json* j, const std::string& path)
    {
        DivergenceParams<double> d;
        if (!j)
            return d;
        ObjectReader r(*j, path);
        d.l = r.number("l", d.l);
        if (const json* a = r.take("a")) {
            if (a->is_string() && a->get<std::string>() == "auto")
                d.a.reset();
            else if (a->is_number())
                d.a = a->get<double>();
            else
                throw ConfigError("expected a positive number or \"auto\"", r.field("a"));
        }
        d.a_prime = r.number("a_prime", d.a_prime);
        d.min_cluster_fraction = r.number("min_cluster_fraction", d.min_cluster_fraction);
        d.max_species = r.unsigned_int("max_species", d.max_species);
        d.invert_split_predicate = r.boolean("invert_split_predicate", d.invert_split_predicate);
        const auto mode = r.string("variance_mode", "paper");
        if (mode == "paper")
            d.variance_mode = VarianceMode::paper;
        else if (mode == "derived")
            d.variance_mode = VarianceMode::derived;
        else
            throw ConfigError("expected \"paper\" or \"derived\"", r.field("variance_mode"));
        if (const json* s = r.take("force_split_schedule")) {
            if (!s->is_array())
                throw ConfigError("expected an array", r.field("force_split_schedule"));
            for (std::size_t i = 0; i < s->size(); ++i) {
                ObjectReader e((*s)[i], r.field("force_split_schedule") + "[" + std::to_string(i) + "]");
                const auto gen = e.unsigned_int("generation", 0);
                const auto count = e.unsigned_int("species", 0);
                e.finish();
                d.force_split_schedule[gen] = count;
            }
        }
        r.finish();
        d.validate();
        return d;
    }

    json ddea_json(const DivergenceParams<double>& d)
    {
        json j = {{"l", d.l},
                  {"a", d.a ? json(*d.a) : json("auto")},
                  {"a_prime", d.a_prime},
                  {"min_cluster_fraction", d.min_cluster_fraction},
                  {"max_species", d.max_species},
                  {"invert_split_predicate", d.invert_split_predicate},
                  {"variance_mode", d.variance_mode == VarianceMode::paper ? "paper" : "derived"}};
        if (!d.force_split_schedule.empty()) {
            json s = json::array();
            for (const auto& [gen, count] : d.force_split_schedule)
                s.push_back({{"generation", gen}, {"species", count}});
            j["force_split_schedule"] = s;
        }
        return j;
    }

    std::optional<DivergenceParams<double>> parse_ddea_section(Algorithm algo, const json* j, const std::string& path)
    {
        if (algo == Algorithm::dea) {
            if (j)
                throw ConfigError("DDEA-only section not allowed when algorithm is DEA", path);
            return std::nullopt;
        }
        return parse_ddea(j, path);
    }

    Algorithm read_algorithm(ObjectReader& r)
    {
        const json* a = r.take("algorithm");
        if (!a)
            throw ConfigError("missing", "algorithm");
        if (!a->is_string())
            throw ConfigError("expected a string", "algorithm");
        return parse_algorithm(a->get<std::string>());
    }

} // namespace

RunConfig parse_run_config(const json& j)
{
    RunConfig c;
    ObjectReader r(j, "");
    c.algorithm = read_algorithm(r);
    c.label = r.string("label", "");
    if (const json* o = r.take("objective")) {
        ObjectReader orr(*o, "objective");
        c.objective.name = orr.string("name", c.objective.name);
        c.objective.dimension = orr.unsigned_int("dimension", c.objective.dimension);
        c.objective.lower = number_or_array(orr, "lower", c.objective.lower);
        c.objective.upper = number_or_array(orr, "upper", c.objective.upper);
        c.objective.noise_std = orr.number("noise_std", c.objective.noise_std);
        orr.finish();
    }
    c.control = parse_control(r.take("control"), "control");
    c.ddea = parse_ddea_section(c.algorithm, r.take("ddea"), "ddea");
    c.budget = r.unsigned_int("budget", c.budget);
    c.seed = r.unsigned_int("seed", c.seed);
    r.finish();
    if (c.budget == 0)
        throw ConfigError("budget must be positive", "budget");
    build_objective(c.objective);
    return c;
}

json to_json(const RunConfig& c)
{
    json j = {{"algorithm", algorithm_name(c.algorithm)},
              {"objective",
               {{"name", c.objective.name},
                {"dimension", c.objective.dimension},
                {"lower", number_or_array(c.objective.lower)},
                {"upper", number_or_array(c.objective.upper)},
                {"noise_std", c.objective.noise_std}}},
              {"control", control_json(c.control)},
              {"budget", c.budget},
              {"seed", c.seed}};
    if (!c.label.empty())
        j["label"] = c.label;
    if (c.ddea)
        j["ddea"] = ddea_json(*c.ddea);
    return j;
}

TrackConfig parse_track_config(const json& j)
{
    TrackConfig c;
    ObjectReader r(j, "");
    c.algorithm = read_algorithm(r);
    c.control = parse_control(r.take("control"), "control");
    c.ddea = parse_ddea_section(c.algorithm, r.take("ddea"), "ddea");
    if (const json* t = r.take("tracking")) {
        ObjectReader tr(*t, "tracking");
        auto& k = c.tracking;
        k.length = tr.unsigned_int("length", k.length);
        k.series_seed = tr.unsigned_int("series_seed", k.series_seed);
        k.mean_log = tr.number("mean_log", k.mean_log);
        k.beta = tr.number("beta", k.beta);
        k.noise_std = tr.number("noise_std", k.noise_std);
        k.series_csv = tr.string("series_csv", k.series_csv);
        k.window = tr.unsigned_int("window", k.window);
        k.horizon = tr.unsigned_int("horizon", k.horizon);
        k.model_order = tr.unsigned_int("model_order", k.model_order);
        k.per_step_budget = tr.unsigned_int("per_step_budget", k.per_step_budget);
        tr.finish();
    }
    c.seed = r.unsigned_int("seed", c.seed);
    r.finish();
    if (c.tracking.per_step_budget <= c.control.population_size)
        throw ConfigError("per-step budget must exceed the population size", "tracking.per_step_budget");
    return c;
}

json to_json(const TrackConfig& c)
{
    const auto& k = c.tracking;
    json t = {{"length", k.length},   {"series_seed", k.series_seed}, {"mean_log", k.mean_log},
              {"beta", k.beta},       {"noise_std", k.noise_std},     {"window", k.window},
              {"horizon", k.horizon}, {"model_order", k.model_order}, {"per_step_budget", k.per_step_budget}};
    if (!k.series_csv.empty())
        t["series_csv"] = k.series_csv;
    json j = {{"algorithm", algorithm_name(c.algorithm)},
              {"control", control_json(c.control)},
              {"tracking", t},
              {"seed", c.seed}};
    if (c.ddea)
        j["ddea"] = ddea_json(*c.ddea);
    return j;
}

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path.string(), "--config");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what(), path.string());
    }
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    return parse_run_config(read_json_file(path));
}

TrackConfig load_track_config(const std::filesystem::path& path)
{
    return parse_track_config(read_json_file(path));
}

ObjectiveSpec<double> build_objective(const ObjectiveConfig& c)
{
    const auto dim = static_cast<Eigen::Index>(c.dimension);
    ObjectiveSpec<double> spec;
    if (c.name == "sphere") {
        spec = make_sphere<double>(dim);
    } else if (c.name == "two_well") {
        if (c.dimension != 1)
            throw ConfigError("two_well is one-dimensional", "objective.dimension");
        spec = make_two_well<double>();
    } else if (c.name == "michalewicz_std" || c.name == "michalewicz_paper") {
        if (c.dimension != 2)
            throw ConfigError(c.name + " is two-dimensional", "objective.dimension");
        spec = c.name == "michalewicz_std" ? make_michalewicz_std<double>() : make_michalewicz_paper<double>();
    } else {
        throw ConfigError("unknown objective '" + c.name + "'", "objective.name");
    }
    if (dim < 1)
        throw ConfigError("dimension must be positive", "objective.dimension");

    auto expand = [&](const std::vector<double>& v, const char* field) {
        if (v.size() == 1)
            return Vector<double>::Constant(dim, v.front()).eval();
        if (v.size() != c.dimension)
            throw ConfigError("expected 1 or dimension values", field);
        return Eigen::Map<const Vector<double>>(v.data(), dim).eval();
    };
    spec.init_bounds = {expand(c.lower, "objective.lower"), expand(c.upper, "objective.upper")};
    try {
        spec.init_bounds.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(e.what(), "objective.lower");
    }
    if (c.noise_std < 0.0)
        throw ConfigError("noise std must be non-negative", "objective.noise_std");
    if (c.noise_std > 0.0)
        spec.noise = GaussianNoise<double>{c.noise_std};
    return spec;
}

TrackingProblem<double> build_tracking_problem(const TrackingConfig& c)
{
    TrackingProblem<double> p;
    if (!c.series_csv.empty()) {
        std::ifstream in(c.series_csv);
        if (!in)
            throw ConfigError("cannot open " + c.series_csv, "tracking.series_csv");
        p.series = read_series_csv(in);
    } else {
        p.series = generate_rain_series<double>(c.length, c.series_seed, {c.mean_log, c.beta, c.noise_std});
    }
    p.window = c.window;
    p.horizon = c.horizon;
    p.model_order = c.model_order;
    p.validate();
    return p;
}

TrackingSetup<double> build_tracking_setup(const TrackConfig& c)
{
    TrackingSetup<double> s;
    s.algorithm = c.algorithm;
    s.control = c.control;
    if (c.ddea)
        s.divergence = *c.ddea;
    s.per_step_budget = c.tracking.per_step_budget;
    s.seed = c.seed;
    return s;
}

json config_schema()
{
    const json control = {
        {"population_size", "integer >= 4, default 100"},
        {"f_weight", "number in (0, 1], default 0.8"},
        {"crossover_rate", "number in [0, 1], default 0.9"},
        {"force_one_gene", "bool, default false; one gene per trial always comes from the donor"},
        {"exclude_target", "bool, default true; difference donors r1, r2 differ from the target index"},
        {"clamp", "bool, default false; clamp trials to the initialization bounds"}};
    const json ddea = {
        {"l", "number > 0, default 1; ball radius for the central fraction"},
        {"a", "number > 0 or \"auto\" (default); split scale"},
        {"a_prime", "number >= 0, default 0.1; merge threshold on mean distance"},
        {"min_cluster_fraction", "number in [0, 0.5), default 0.1"},
        {"max_species", "integer >= 1, default 16"},
        {"invert_split_predicate", "bool, default false"},
        {"variance_mode", "\"paper\" (default) or \"derived\""},
        {"force_split_schedule", "TEST ONLY: array of {generation, species}"}};
    return {
        {"run",
         {{"algorithm", "\"DEA\" | \"DDEA\" (required)"},
          {"label", "string, optional row label for compare"},
          {"objective",
           {{"name", "sphere | two_well | michalewicz_std | michalewicz_paper"},
            {"dimension", "integer; 1 for two_well, 2 for michalewicz"},
            {"lower", "number or array, initialization lower bound"},
            {"upper", "number or array, initialization upper bound"},
            {"noise_std", "number >= 0, additive Gaussian fitness noise"}}},
          {"control", control},
          {"ddea", ddea},
          {"budget", "integer > 0, objective evaluations"},
          {"seed", "unsigned 64-bit integer"}}},
        {"track",
         {{"algorithm", "\"DEA\" | \"DDEA\" (required)"},
          {"control", control},
          {"ddea", ddea},
          {"tracking",
           {{"length", "integer, default 2000"},
            {"series_seed", "integer, default 1"},
            {"mean_log", "number, default 1"},
            {"beta", "number in [0, 1), default 0.9"},
            {"noise_std", "number >= 0, default 0.1"},
            {"series_csv", "path to a tick,value_dB CSV; replaces the generator"},
            {"window", "integer >= model_order + 1, default 500"},
            {"horizon", "integer >= 1, default 1"},
            {"model_order", "integer >= 1, default 2"},
            {"per_step_budget", "integer > population_size, default 1500"}}},
          {"seed", "unsigned 64-bit integer"}}}};
}

} // namespace ddea::harness
