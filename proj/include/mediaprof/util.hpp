#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mediaprof/errors.hpp"

namespace mediaprof {

// ---------------------------------------------------------------- hashing

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 14695981039346656037ull) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string to_hex(std::uint64_t v);

inline std::string content_key(std::string_view s) { return to_hex(fnv1a64(s)); }

// ---------------------------------------------------------------- matrix

// Dense row-major matrix of doubles. Just enough linear algebra for the
// classifiers; rows are exposed as spans.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool operator==(const Matrix&) const = default;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// ---------------------------------------------------------------- rng

// Portable Fisher-Yates; std::shuffle is implementation-defined, which would
// break cross-platform reproducibility of fold assignments.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

// ---------------------------------------------------------------- text

std::vector<std::string> tokenize(std::string_view text);
std::string truncate_tokens(std::string_view text, std::size_t max_tokens);
std::string trim(std::string_view s);
std::string lower(std::string_view s);

// ---------------------------------------------------------------- parallel

// Runs fn(0..n-1) on up to `jobs` threads. Work units must be independent;
// callers get determinism by depositing results by index and reducing
// sequentially afterwards.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------- logging

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Silent = 4 };

void set_log_level(LogLevel level);
LogLevel log_level();
void log_message(LogLevel level, const std::string& msg);

inline void log_info(const std::string& msg) { log_message(LogLevel::Info, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::Warn, msg); }

} // namespace mediaprof
