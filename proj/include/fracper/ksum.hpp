#pragma once

namespace fracper {

// Neumaier-compensated accumulator. Summing the same values in the same
// order yields bitwise-identical results, which the deterministic parallel
// reductions rely on.
struct ksum {
    double s = 0.0;
    double c = 0.0;

    void add(double v) {
        const double t = s + v;
        const double as = s < 0 ? -s : s;
        const double av = v < 0 ? -v : v;
        if (as >= av)
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }

    double get() const { return s + c; }

    ksum& operator+=(double v) {
        add(v);
        return *this;
    }
};

} // namespace fracper
