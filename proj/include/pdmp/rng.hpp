#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace pdmp {

// Deterministic random stream addressed by (seed, stream). The engine is
// mt19937_64 seeded through two rounds of splitmix64 mixing, so distinct
// stream indices under one seed give decorrelated sequences and replica k
// can always be reproduced in isolation.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    static std::string algorithm() { return "mt19937_64+splitmix64"; }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01();

    // Uniform on the open interval (0, 1); safe to pass to log().
    double uniform_pos();

    // Exponential with the given rate; strictly positive. rate must be > 0.
    double exponential(double rate);

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

}  // namespace pdmp
