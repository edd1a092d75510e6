#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace stmid::ad {

// Reverse-mode tape over scalar doubles. Nodes have at most two parents with
// local partials fixed at record time; a backward sweep is one linear pass.
class Tape {
  public:
    struct Node {
        int p0, p1;
        double d0, d1;
    };

    int push(double v, int p0, double d0, int p1, double d1) {
        nodes_.push_back({p0, p1, d0, d1});
        vals_.push_back(v);
        return static_cast<int>(vals_.size()) - 1;
    }

    // Leaf with no parents; used for parameters, differentiable inputs, and
    // constants alike (constants simply never have their adjoints read).
    int leaf(double v) { return push(v, -1, 0.0, -1, 0.0); }

    double val(int i) const { return vals_[i]; }
    std::size_t size() const { return vals_.size(); }

    void clear() {
        nodes_.clear();
        vals_.clear();
    }

    void reserve(std::size_t n) {
        nodes_.reserve(n);
        vals_.reserve(n);
    }

    // Reverse sweep seeding d(out)/d(out) = 1. `adj` is reused across calls.
    void backward(int out, std::vector<double>& adj) const {
        adj.assign(vals_.size(), 0.0);
        adj[out] = 1.0;
        for (int i = out; i >= 0; --i) {
            const double a = adj[i];
            if (a == 0.0) continue;
            const Node& n = nodes_[i];
            if (n.p0 >= 0) adj[n.p0] += n.d0 * a;
            if (n.p1 >= 0) adj[n.p1] += n.d1 * a;
        }
    }

  private:
    std::vector<Node> nodes_;
    std::vector<double> vals_;
};

// Handle to one tape entry. Carries the value so arithmetic never has to
// look back into the tape.
struct Var {
    Tape* tape = nullptr;
    int i = -1;
    double v = 0.0;

    Var() = default;
    Var(Tape* t, int idx, double val) : tape(t), i(idx), v(val) {}

    double value() const { return v; }
};

inline Var make_leaf(Tape& t, double v) { return Var(&t, t.leaf(v), v); }
inline Var make_const(Tape& t, double v) { return Var(&t, t.leaf(v), v); }

// --- arithmetic -------------------------------------------------------------

inline Var operator+(Var a, Var b) {
    return Var(a.tape, a.tape->push(a.v + b.v, a.i, 1.0, b.i, 1.0), a.v + b.v);
}
inline Var operator-(Var a, Var b) {
    return Var(a.tape, a.tape->push(a.v - b.v, a.i, 1.0, b.i, -1.0), a.v - b.v);
}
inline Var operator*(Var a, Var b) {
    return Var(a.tape, a.tape->push(a.v * b.v, a.i, b.v, b.i, a.v), a.v * b.v);
}
inline Var operator/(Var a, Var b) {
    const double v = a.v / b.v;
    return Var(a.tape, a.tape->push(v, a.i, 1.0 / b.v, b.i, -v / b.v), v);
}
inline Var operator-(Var a) {
    return Var(a.tape, a.tape->push(-a.v, a.i, -1.0, -1, 0.0), -a.v);
}

// Scalar constants fold into unary nodes instead of materializing leaves.
inline Var operator+(Var a, double c) {
    return Var(a.tape, a.tape->push(a.v + c, a.i, 1.0, -1, 0.0), a.v + c);
}
inline Var operator+(double c, Var a) { return a + c; }
inline Var operator-(Var a, double c) { return a + (-c); }
inline Var operator-(double c, Var a) {
    return Var(a.tape, a.tape->push(c - a.v, a.i, -1.0, -1, 0.0), c - a.v);
}
inline Var operator*(Var a, double c) {
    return Var(a.tape, a.tape->push(a.v * c, a.i, c, -1, 0.0), a.v * c);
}
inline Var operator*(double c, Var a) { return a * c; }
inline Var operator/(Var a, double c) { return a * (1.0 / c); }
inline Var operator/(double c, Var a) {
    const double v = c / a.v;
    return Var(a.tape, a.tape->push(v, a.i, -v / a.v, -1, 0.0), v);
}

// --- elementary functions ---------------------------------------------------

inline Var sin(Var x) {
    const double v = std::sin(x.v);
    return Var(x.tape, x.tape->push(v, x.i, std::cos(x.v), -1, 0.0), v);
}
inline Var cos(Var x) {
    const double v = std::cos(x.v);
    return Var(x.tape, x.tape->push(v, x.i, -std::sin(x.v), -1, 0.0), v);
}
inline Var atan(Var x) {
    const double v = std::atan(x.v);
    return Var(x.tape, x.tape->push(v, x.i, 1.0 / (1.0 + x.v * x.v), -1, 0.0), v);
}
inline Var tanh(Var x) {
    const double v = std::tanh(x.v);
    return Var(x.tape, x.tape->push(v, x.i, 1.0 - v * v, -1, 0.0), v);
}
inline Var exp(Var x) {
    const double v = std::exp(x.v);
    return Var(x.tape, x.tape->push(v, x.i, v, -1, 0.0), v);
}
inline Var sqrt(Var x) {
    const double v = std::sqrt(x.v);
    return Var(x.tape, x.tape->push(v, x.i, 0.5 / v, -1, 0.0), v);
}

inline double stable_logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Double overloads so templated code can `using ad::logistic;` etc. and work
// for plain values too.
inline double logistic(double x) { return stable_logistic(x); }
inline double clamp(double x, double lo, double hi) { return x < lo ? lo : (x > hi ? hi : x); }
inline double sq(double x) { return x * x; }

inline Var logistic(Var x) {
    const double v = stable_logistic(x.v);
    return Var(x.tape, x.tape->push(v, x.i, v * (1.0 - v), -1, 0.0), v);
}

// Saturating clamp; zero partial outside the interval.
inline Var clamp(Var x, double lo, double hi) {
    if (x.v < lo) return Var(x.tape, x.tape->push(lo, x.i, 0.0, -1, 0.0), lo);
    if (x.v > hi) return Var(x.tape, x.tape->push(hi, x.i, 0.0, -1, 0.0), hi);
    return Var(x.tape, x.tape->push(x.v, x.i, 1.0, -1, 0.0), x.v);
}

inline Var sq(Var x) { return x * x; }

// ---------------------------------------------------------------------------
// Dual: a tape value paired with its tangent with respect to one scalar input
// (the prediction time). Tangents are tape values themselves, so expressions
// built from them can be reverse-differentiated with respect to parameters.
// A tangent index of -1 means "identically zero" and is folded away, which
// keeps the pure-history part of a network free of tangent bookkeeping.
// ---------------------------------------------------------------------------
struct Dual {
    Var re;
    Var dot;  // dot.i == -1 => tangent identically zero

    Dual() = default;
    explicit Dual(Var v) : re(v) { dot.tape = v.tape; }
    Dual(Var v, Var d) : re(v), dot(d) {}

    bool has_dot() const { return dot.i >= 0; }
    double value() const { return re.v; }
    double tangent() const { return has_dot() ? dot.v : 0.0; }
};

inline Dual dual_const(Tape& t, double v) { return Dual(make_const(t, v)); }

namespace detail {
inline Var add_or(Var a, Var b, bool ha, bool hb) {
    if (ha && hb) return a + b;
    if (ha) return a;
    return b;
}
}  // namespace detail

inline Dual operator+(const Dual& a, const Dual& b) {
    Dual r(a.re + b.re);
    if (a.has_dot() || b.has_dot())
        r.dot = detail::add_or(a.dot, b.dot, a.has_dot(), b.has_dot());
    return r;
}
inline Dual operator-(const Dual& a, const Dual& b) {
    Dual r(a.re - b.re);
    if (a.has_dot() && b.has_dot()) r.dot = a.dot - b.dot;
    else if (a.has_dot()) r.dot = a.dot;
    else if (b.has_dot()) r.dot = -b.dot;
    return r;
}
inline Dual operator*(const Dual& a, const Dual& b) {
    Dual r(a.re * b.re);
    if (a.has_dot() && b.has_dot()) r.dot = a.dot * b.re + a.re * b.dot;
    else if (a.has_dot()) r.dot = a.dot * b.re;
    else if (b.has_dot()) r.dot = a.re * b.dot;
    return r;
}
inline Dual operator/(const Dual& a, const Dual& b) {
    Var q = a.re / b.re;
    Dual r(q);
    // d(a/b) = (da - q*db) / b
    if (a.has_dot() && b.has_dot()) r.dot = (a.dot - q * b.dot) / b.re;
    else if (a.has_dot()) r.dot = a.dot / b.re;
    else if (b.has_dot()) r.dot = -(q * b.dot) / b.re;
    return r;
}
inline Dual operator-(const Dual& a) {
    Dual r(-a.re);
    if (a.has_dot()) r.dot = -a.dot;
    return r;
}

inline Dual operator+(const Dual& a, double c) {
    Dual r(a.re + c);
    r.dot = a.dot;
    return r;
}
inline Dual operator+(double c, const Dual& a) { return a + c; }
inline Dual operator-(const Dual& a, double c) { return a + (-c); }
inline Dual operator-(double c, const Dual& a) {
    Dual r(c - a.re);
    if (a.has_dot()) r.dot = -a.dot;
    return r;
}
inline Dual operator*(const Dual& a, double c) {
    Dual r(a.re * c);
    if (a.has_dot()) r.dot = a.dot * c;
    return r;
}
inline Dual operator*(double c, const Dual& a) { return a * c; }
inline Dual operator/(const Dual& a, double c) { return a * (1.0 / c); }
inline Dual operator/(double c, const Dual& a) {
    Var q = c / a.re;
    Dual r(q);
    if (a.has_dot()) r.dot = -(q * a.dot) / a.re;
    return r;
}

inline Dual sin(const Dual& x) {
    Dual r(sin(x.re));
    if (x.has_dot()) r.dot = cos(x.re) * x.dot;
    return r;
}
inline Dual cos(const Dual& x) {
    Dual r(cos(x.re));
    if (x.has_dot()) r.dot = -(sin(x.re) * x.dot);
    return r;
}
inline Dual atan(const Dual& x) {
    Dual r(atan(x.re));
    if (x.has_dot()) r.dot = x.dot / (1.0 + x.re * x.re);
    return r;
}
inline Dual tanh(const Dual& x) {
    Var y = tanh(x.re);
    Dual r(y);
    if (x.has_dot()) r.dot = (1.0 - y * y) * x.dot;
    return r;
}
inline Dual exp(const Dual& x) {
    Var y = exp(x.re);
    Dual r(y);
    if (x.has_dot()) r.dot = y * x.dot;
    return r;
}
inline Dual sqrt(const Dual& x) {
    Var y = sqrt(x.re);
    Dual r(y);
    if (x.has_dot()) r.dot = x.dot / (2.0 * y);
    return r;
}
inline Dual logistic(const Dual& x) {
    Var y = logistic(x.re);
    Dual r(y);
    if (x.has_dot()) r.dot = y * (1.0 - y) * x.dot;
    return r;
}
inline Dual clamp(const Dual& x, double lo, double hi) {
    Dual r(clamp(x.re, lo, hi));
    if (x.has_dot() && x.re.v >= lo && x.re.v <= hi) r.dot = x.dot;
    return r;
}
inline Dual sq(const Dual& x) { return x * x; }

// Value extraction shared by templated physics code.
inline double scalar_value(double x) { return x; }
inline double scalar_value(const Var& x) { return x.v; }
inline double scalar_value(const Dual& x) { return x.re.v; }

}  // namespace stmid::ad
