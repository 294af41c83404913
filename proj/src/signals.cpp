#include "delaymargin/signals.hpp"

#include <algorithm>
#include <cmath>

namespace delaymargin {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

DelaySignal DelaySignal::constant(double level, double epsilon) {
    if (!(level >= -1.0 && level <= 1.0))
        throw ValidationError("DelaySignal: constant level must lie in [-1, 1]");
    if (!(epsilon >= 0.0))
        throw ValidationError("DelaySignal: epsilon must be >= 0");
    DelaySignal s(Kind::Constant, epsilon);
    s.level_ = level;
    return s;
}

DelaySignal DelaySignal::piecewise_constant(std::uint64_t seed, double dwell,
                                            double epsilon) {
    if (!(dwell > 0.0)) throw ValidationError("DelaySignal: dwell must be > 0");
    if (!(epsilon >= 0.0))
        throw ValidationError("DelaySignal: epsilon must be >= 0");
    DelaySignal s(Kind::PiecewiseConstant, epsilon);
    s.seed_ = seed;
    s.dwell_ = dwell;
    return s;
}

DelaySignal DelaySignal::sinusoid(double freq, double phase, double epsilon) {
    if (!(freq > 0.0)) throw ValidationError("DelaySignal: freq must be > 0");
    if (!(epsilon >= 0.0))
        throw ValidationError("DelaySignal: epsilon must be >= 0");
    DelaySignal s(Kind::Sinusoid, epsilon);
    s.freq_ = freq;
    s.phase_ = phase;
    return s;
}

double DelaySignal::operator()(double t) const {
    double d = 0.0;
    switch (kind_) {
        case Kind::Constant:
            d = level_;
            break;
        case Kind::PiecewiseConstant: {
            const double tt = std::max(t, 0.0);
            const auto idx = static_cast<std::uint64_t>(std::floor(tt / dwell_));
            const std::uint64_t h = splitmix64((seed_ << 20) ^ idx);
            d = 2.0 * (static_cast<double>(h) * 0x1p-64) - 1.0;
            break;
        }
        case Kind::Sinusoid:
            d = std::sin(2.0 * M_PI * freq_ * t + phase_);
            break;
    }
    return std::clamp(d, -1.0, 1.0);
}

}  // namespace delaymargin
