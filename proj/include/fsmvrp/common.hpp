#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace fsmvrp {

// Demand and capacity quantities are integer units at the instance's declared
// scale, so demand equalities can be checked exactly.
using Quantity = std::int64_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InstanceError : public Error {
public:
    using Error::Error;
};

class ModelError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    using Error::Error;
};

// Elapsed-time source for solver budgets.
//
// In wall mode elapsed() is steady-clock seconds. In deterministic mode it is
// accumulated work (simplex pivots, heuristic moves) converted to nominal
// seconds, so limits and reported times are reproducible byte for byte.
class WorkClock {
public:
    enum class Mode { wall, deterministic };

    // Nominal cost of one unit of work in deterministic mode.
    static constexpr double kSecondsPerTick = 1e-4;

    explicit WorkClock(Mode mode = Mode::wall)
        : mode_(mode), start_(std::chrono::steady_clock::now()) {}

    Mode mode() const { return mode_; }
    bool deterministic() const { return mode_ == Mode::deterministic; }

    void tick(std::int64_t units = 1) { ticks_ += units; }
    std::int64_t ticks() const { return ticks_; }

    double elapsed() const {
        if (mode_ == Mode::deterministic) {
            return static_cast<double>(ticks_) * kSecondsPerTick;
        }
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    Mode mode_;
    std::chrono::steady_clock::time_point start_;
    std::int64_t ticks_ = 0;
};

// A time limit measured on a WorkClock.
class Deadline {
public:
    Deadline(WorkClock& clock, double limit_s) : clock_(&clock), at_(clock.elapsed() + limit_s) {}

    static Deadline never(WorkClock& clock) { return Deadline(clock, kInfinity); }

    bool expired() const { return clock_->elapsed() >= at_; }
    double remaining() const { return at_ - clock_->elapsed(); }
    WorkClock& clock() const { return *clock_; }

private:
    WorkClock* clock_;
    double at_;
};

}  // namespace fsmvrp
