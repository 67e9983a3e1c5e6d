#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rtriage {

inline constexpr std::string_view kToolName = "rtriage";
inline constexpr std::string_view kToolVersion = "1.0.0";

/// Thrown when an analysis overruns its deadline.
class TimeoutError : public std::runtime_error
{
public:
    TimeoutError() : std::runtime_error("analysis deadline exceeded") {}
};

/// Cooperative cancellation point. A default-constructed deadline never expires.
class Deadline
{
public:
    using Clock = std::chrono::steady_clock;

    Deadline() = default;
    explicit Deadline(Clock::time_point at) : at_(at) {}

    static Deadline after(std::chrono::duration<double> budget)
    {
        return Deadline(Clock::now() + std::chrono::duration_cast<Clock::duration>(budget));
    }

    [[nodiscard]] bool expired() const { return at_ && Clock::now() >= *at_; }

    void check() const
    {
        if (expired())
            throw TimeoutError();
    }

private:
    std::optional<Clock::time_point> at_;
};

/// 64-bit FNV-1a; stable across platforms and runs.
constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL)
{
    std::uint64_t h = seed;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

} // namespace rtriage
