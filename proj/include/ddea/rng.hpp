#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace ddea {

/// Deterministic random stream keyed by (seed, stream id).
///
/// Each stream owns its engine, so a species' draws do not depend on how
/// many numbers any other species consumed. Identical (seed, id, call
/// sequence) always yields identical outputs.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : _seed(seed), _stream_id(stream_id)
    {
        std::seed_seq seq{
            static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
            static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
            0x9e3779b9u};
        _engine.seed(seq);
    }

    std::uint64_t seed() const { return _seed; }
    std::uint64_t stream_id() const { return _stream_id; }

    /// Uniform on [0, 1); 1 is never returned.
    double uniform01() { return static_cast<double>(_engine() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, n).
    std::size_t index(std::size_t n)
    {
        std::uniform_int_distribution<std::size_t> dist(0, n - 1);
        return dist(_engine);
    }

    double normal() { return _normal(_engine); }

    double normal(double mean, double std_dev) { return mean + std_dev * _normal(_engine); }

private:
    std::uint64_t _seed;
    std::uint64_t _stream_id;
    std::mt19937_64 _engine;
    std::normal_distribution<double> _normal{0.0, 1.0};
};

/// Hands out streams with ids from a monotone counter, so no two streams
/// created within one run ever collide.
class StreamFactory {
public:
    explicit StreamFactory(std::uint64_t seed) : _seed(seed) {}

    RngStream next() { return RngStream(_seed, _next_id++); }

    std::uint64_t seed() const { return _seed; }
    std::uint64_t allocated() const { return _next_id; }

private:
    std::uint64_t _seed;
    std::uint64_t _next_id = 0;
};

} // namespace ddea
