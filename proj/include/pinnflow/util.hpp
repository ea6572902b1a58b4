#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pinnflow {

/// Invalid configuration values, missing/empty inputs, malformed files.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values encountered during evaluation or training.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// splitmix64 step; used to derive independent seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic sub-stream seed: same (master, salt) always gives the same seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
    std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + salt * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

} // namespace pinnflow
