#pragma once

#include <cstdint>

#include "delaymargin/errors.hpp"

namespace delaymargin {

/// Bounded perturbation signal d(t) in [-1, 1] with magnitude epsilon.
/// The actual input delay is r + epsilon * d(t).
class DelaySignal {
public:
    enum class Kind { Constant, PiecewiseConstant, Sinusoid };

    static DelaySignal constant(double level, double epsilon);
    /// Deterministic uniform draws on consecutive dwell intervals; a pure
    /// function of (seed, interval index), so evaluation order is irrelevant.
    static DelaySignal piecewise_constant(std::uint64_t seed, double dwell,
                                          double epsilon);
    static DelaySignal sinusoid(double freq, double phase, double epsilon);

    double operator()(double t) const;

    Kind kind() const { return kind_; }
    double epsilon() const { return epsilon_; }

private:
    DelaySignal(Kind kind, double epsilon) : kind_(kind), epsilon_(epsilon) {}

    Kind kind_;
    double epsilon_ = 0.0;
    double level_ = 0.0;
    std::uint64_t seed_ = 0;
    double dwell_ = 1.0;
    double freq_ = 1.0;
    double phase_ = 0.0;
};

/// SplitMix64 hash step; used for seeded piecewise-constant draws.
std::uint64_t splitmix64(std::uint64_t z);

}  // namespace delaymargin
