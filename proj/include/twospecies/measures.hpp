#pragma once

/// One-dimensional probability measures and optimal-transport distances.
///
/// Three concrete representations are supported: piecewise-constant
/// densities, atomic (empirical) measures with uniform weights, and initial
/// data given analytically or as a tabulated CDF.  Distances W_p are
/// computed through quantile functions, for which the 1-D transport problem
/// is explicit.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"

namespace twospecies {

// ---------------------------------------------------------------------------
// Measure representations
// ---------------------------------------------------------------------------

/// Piecewise-constant density: heights d_0..d_{n-2} over the cells of a
/// strictly increasing breakpoint grid z_0 < ... < z_{n-1}.  Heights are
/// non-negative; zero-height cells represent gaps in the support.
struct PiecewiseDensity {
    std::vector<double> breakpoints;
    std::vector<double> heights;

    [[nodiscard]] std::size_t cells() const { return heights.size(); }

    [[nodiscard]] double mass() const {
        double m = 0.0;
        for (std::size_t i = 0; i < heights.size(); ++i)
            m += heights[i] * (breakpoints[i + 1] - breakpoints[i]);
        return m;
    }

    void validate() const {
        if (breakpoints.size() < 2 || heights.size() + 1 != breakpoints.size())
            throw std::invalid_argument("piecewise density: size mismatch");
        for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
            if (!(breakpoints[i] < breakpoints[i + 1]))
                throw std::invalid_argument("piecewise density: breakpoints not strictly increasing");
        for (double d : heights)
            if (!(d >= 0.0) || !std::isfinite(d))
                throw std::invalid_argument("piecewise density: negative or non-finite height");
    }
};

/// Atomic measure with n sorted atoms of weight 1/n each.  Coincident atoms
/// are allowed (opposite-species pairs project onto one point).
struct EmpiricalMeasure {
    std::vector<double> atoms;

    void validate() const {
        if (atoms.empty()) throw std::invalid_argument("empirical measure: no atoms");
        for (std::size_t i = 0; i + 1 < atoms.size(); ++i)
            if (atoms[i] > atoms[i + 1])
                throw std::invalid_argument("empirical measure: atoms not sorted");
    }
};

/// Right-continuous CDF stored as nodes (x, F) with linear interpolation.
/// Duplicate x values encode jumps; equal F values encode plateaus.
struct Cdf {
    struct Node {
        double x;
        double F;
    };
    std::vector<Node> nodes;

    /// F(x), right-continuous; 0 left of the first node, 1 right of the last.
    [[nodiscard]] double operator()(double x) const {
        if (nodes.empty()) return 0.0;
        if (x < nodes.front().x) return 0.0;
        if (x >= nodes.back().x) return nodes.back().F;
        // Last node with node.x <= x; ties resolved to the last duplicate.
        auto it = std::upper_bound(nodes.begin(), nodes.end(), x,
                                   [](double v, const Node& n) { return v < n.x; });
        const Node& hi = *it;
        const Node& lo = *(it - 1);
        if (lo.x == x || hi.x == lo.x) return lo.F;
        double t = (x - lo.x) / (hi.x - lo.x);
        return lo.F + t * (hi.F - lo.F);
    }

    /// Left limit of F at x: the pre-jump value when x is a jump point.
    [[nodiscard]] double left_limit(double x) const {
        if (nodes.empty() || x <= nodes.front().x) return 0.0;
        if (x > nodes.back().x) return nodes.back().F;
        // First node with node.x >= x; its F is the value just below a jump.
        auto it = std::lower_bound(nodes.begin(), nodes.end(), x,
                                   [](const Node& n, double v) { return n.x < v; });
        if (it->x == x) return it->F;
        const Node& hi = *it;
        const Node& lo = *(it - 1);
        double t = (x - lo.x) / (hi.x - lo.x);
        return lo.F + t * (hi.F - lo.F);
    }

    void validate() const {
        if (nodes.size() < 2) throw std::invalid_argument("cdf: too few nodes");
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            if (nodes[i].x > nodes[i + 1].x)
                throw std::invalid_argument("cdf: x not non-decreasing");
            if (nodes[i].F > nodes[i + 1].F + 1e-15)
                throw std::invalid_argument("cdf: F not non-decreasing");
        }
        if (std::abs(nodes.front().F) > 1e-9 || std::abs(nodes.back().F - 1.0) > 1e-9)
            throw std::invalid_argument("cdf: limits are not 0 and 1 (unit mass required)");
    }
};

/// Piecewise-linear quantile function on [0,1): contiguous segments in s,
/// each affine in s; discontinuities between segments encode support gaps.
struct QuantileFunction {
    struct Segment {
        double s_lo;
        double s_hi;
        double x_lo;
        double slope;

        [[nodiscard]] double at(double s) const { return x_lo + slope * (s - s_lo); }
        [[nodiscard]] double x_hi() const { return at(s_hi); }
    };
    std::vector<Segment> segments;

    [[nodiscard]] double operator()(double s) const {
        assert(!segments.empty());
        if (s <= segments.front().s_lo) return segments.front().x_lo;
        if (s >= segments.back().s_hi) return segments.back().x_hi();
        auto it = std::upper_bound(segments.begin(), segments.end(), s,
                                   [](double v, const Segment& g) { return v < g.s_hi; });
        return it->at(s);
    }
};

// ---------------------------------------------------------------------------
// Reconstruction from particle positions
// ---------------------------------------------------------------------------

namespace detail {

inline PiecewiseDensity reconstruct_from_positions(const std::vector<double>& positions,
                                                   double unit) {
    PiecewiseDensity d;
    for (std::size_t i = 0; i + 1 < positions.size(); ++i) {
        double gap = positions[i + 1] - positions[i];
        if (gap < 0.0)
            throw std::invalid_argument("positions not sorted in density reconstruction");
        if (gap == 0.0) continue;  // coincident run, same value continues
        if (d.breakpoints.empty()) d.breakpoints.push_back(positions[i]);
        d.breakpoints.push_back(positions[i + 1]);
        d.heights.push_back(1.0 / (unit * gap));
    }
    if (d.heights.empty())
        throw std::invalid_argument("density reconstruction needs two distinct positions");
    return d;
}

}  // namespace detail

/// Heights 1/(N * gap) over the inter-particle cells.  With N equal to the
/// particle count each cell carries mass 1/N and the total is (n-1)/N; this
/// is the Lagrangian height convention.  Coincident positions (possible in
/// hand-built initial data) would be atoms of the reconstruction; their
/// zero-width cells are skipped, so the result captures the density part.
inline PiecewiseDensity piecewise_from_state(const std::vector<double>& positions, int N) {
    if (positions.size() < 2) throw std::invalid_argument("need at least two positions");
    if (N < 1) throw std::invalid_argument("N must be positive");
    return detail::reconstruct_from_positions(positions, static_cast<double>(N));
}

/// Unit-mass variant: heights 1/(g * gap) with g the number of positive
/// gaps, so every cell carries equal mass and the total is exactly 1.  This
/// is the form used wherever a probability measure is required (transport
/// distances, coupling bounds).
inline PiecewiseDensity piecewise_from_state_unit(const std::vector<double>& positions) {
    if (positions.size() < 2) throw std::invalid_argument("need at least two positions");
    std::size_t gaps = 0;
    for (std::size_t i = 0; i + 1 < positions.size(); ++i)
        if (positions[i + 1] > positions[i]) ++gaps;
    if (gaps == 0) throw std::invalid_argument("density reconstruction needs two distinct positions");
    return detail::reconstruct_from_positions(positions, static_cast<double>(gaps));
}

// ---------------------------------------------------------------------------
// CDFs and quantile functions
// ---------------------------------------------------------------------------

inline Cdf cdf(const PiecewiseDensity& d) {
    d.validate();
    Cdf f;
    f.nodes.reserve(d.breakpoints.size());
    double acc = 0.0;
    f.nodes.push_back({d.breakpoints.front(), 0.0});
    for (std::size_t i = 0; i < d.cells(); ++i) {
        acc += d.heights[i] * (d.breakpoints[i + 1] - d.breakpoints[i]);
        f.nodes.push_back({d.breakpoints[i + 1], acc});
    }
    return f;
}

inline Cdf cdf(const EmpiricalMeasure& mu) {
    mu.validate();
    Cdf f;
    const double n = static_cast<double>(mu.atoms.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < mu.atoms.size();) {
        std::size_t j = i;
        while (j < mu.atoms.size() && mu.atoms[j] == mu.atoms[i]) ++j;
        double next = acc + static_cast<double>(j - i) / n;
        f.nodes.push_back({mu.atoms[i], acc});
        f.nodes.push_back({mu.atoms[i], next});
        acc = next;
        i = j;
    }
    return f;
}

/// Generalized inverse X(s) = inf{x : F(x) > s}.  Rising pieces invert to
/// affine segments, jumps to constant segments; plateaus become jumps of X.
inline QuantileFunction pseudo_inverse(const Cdf& f) {
    f.validate();
    QuantileFunction q;
    for (std::size_t i = 0; i + 1 < f.nodes.size(); ++i) {
        const auto& a = f.nodes[i];
        const auto& b = f.nodes[i + 1];
        if (b.F <= a.F) continue;  // plateau: X jumps, no segment
        double slope = (b.x > a.x) ? (b.x - a.x) / (b.F - a.F) : 0.0;
        q.segments.push_back({a.F, b.F, a.x, slope});
    }
    if (q.segments.empty()) throw std::invalid_argument("pseudo-inverse: flat cdf");
    return q;
}

inline QuantileFunction quantile_of(const EmpiricalMeasure& mu) {
    mu.validate();
    QuantileFunction q;
    const double n = static_cast<double>(mu.atoms.size());
    for (std::size_t i = 0; i < mu.atoms.size(); ++i)
        q.segments.push_back({static_cast<double>(i) / n,
                              static_cast<double>(i + 1) / n, mu.atoms[i], 0.0});
    return q;
}

inline QuantileFunction quantile_of(const PiecewiseDensity& d) {
    return pseudo_inverse(cdf(d));
}

inline QuantileFunction quantile_of(const QuantileFunction& q) { return q; }

// ---------------------------------------------------------------------------
// Wasserstein distances
// ---------------------------------------------------------------------------

namespace detail {

/// 32-point Gauss-Legendre rule on [-1,1], computed once by Newton iteration
/// on the Legendre recurrence.
inline const std::vector<std::pair<double, double>>& gauss_legendre_32() {
    static const std::vector<std::pair<double, double>> rule = [] {
        constexpr int n = 32;
        std::vector<std::pair<double, double>> r(n);
        for (int k = 0; k < n; ++k) {
            // Chebyshev initial guess, then Newton on P_n.
            double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = x;
                for (int j = 2; j <= n; ++j) {
                    double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            r[k] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
        }
        return r;
    }();
    return rule;
}

}  // namespace detail

/// W_p as the L^p distance of quantile functions on [0,1].  p = 1 and p = 2
/// integrate in closed form per segment; other finite p >= 1 use 32-point
/// Gauss-Legendre per cell (split at sign changes, where the integrand kinks).
inline double wasserstein_p(const QuantileFunction& qa, const QuantileFunction& qb, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("wasserstein order must be >= 1");
    // Union of s-breakpoints.
    std::vector<double> cuts{0.0, 1.0};
    for (const auto& g : qa.segments) {
        cuts.push_back(g.s_lo);
        cuts.push_back(g.s_hi);
    }
    for (const auto& g : qb.segments) {
        cuts.push_back(g.s_lo);
        cuts.push_back(g.s_hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total = 0.0;
    std::size_t ia = 0, ib = 0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double lo = cuts[c], hi = cuts[c + 1];
        if (hi <= 0.0 || lo >= 1.0 || hi <= lo) continue;
        while (ia + 1 < qa.segments.size() && qa.segments[ia].s_hi <= lo) ++ia;
        while (ib + 1 < qb.segments.size() && qb.segments[ib].s_hi <= lo) ++ib;
        const auto& ga = qa.segments[ia];
        const auto& gb = qb.segments[ib];
        // Difference is affine on the cell: D(s) = A + B s.
        double B = ga.slope - gb.slope;
        double A = (ga.x_lo - ga.slope * ga.s_lo) - (gb.x_lo - gb.slope * gb.s_lo);
        auto piece = [&](double a, double b) -> double {
            if (b <= a) return 0.0;
            if (p == 1.0) {
                // Trapezoid of |D| on a sign-constant piece.
                return 0.5 * (std::abs(A + B * a) + std::abs(A + B * b)) * (b - a);
            }
            if (p == 2.0) {
                if (B == 0.0) return A * A * (b - a);
                double ua = A + B * a, ub = A + B * b;
                return (ub * ub * ub - ua * ua * ua) / (3.0 * B);
            }
            double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            double acc = 0.0;
            for (const auto& [xi, wi] : detail::gauss_legendre_32())
                acc += wi * std::pow(std::abs(A + B * (mid + half * xi)), p);
            return acc * half;
        };
        double root = (B != 0.0) ? -A / B : lo - 1.0;
        if (root > lo && root < hi)
            total += piece(lo, root) + piece(root, hi);
        else
            total += piece(lo, hi);
    }
    return std::pow(total, 1.0 / p);
}

template <class MA, class MB>
double wasserstein_p(const MA& a, const MB& b, double p) {
    return wasserstein_p(quantile_of(a), quantile_of(b), p);
}

/// W_1 as the L^1 distance of the CDFs; analytic cross-check for p = 1.
inline double w1_via_cdf(const Cdf& fa, const Cdf& fb) {
    std::vector<double> cuts;
    for (const auto& n : fa.nodes) cuts.push_back(n.x);
    for (const auto& n : fb.nodes) cuts.push_back(n.x);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double lo = cuts[c], hi = cuts[c + 1];
        if (hi <= lo) continue;
        // Both CDFs are affine on (lo, hi): the right-continuous value at lo
        // and the left limit at hi bound the trapezoid.
        double fla = fa(lo), fha = fa.left_limit(hi);
        double flb = fb(lo), fhb = fb.left_limit(hi);
        double da0 = fla - flb, da1 = fha - fhb;
        if ((da0 < 0.0) != (da1 < 0.0) && da0 != da1) {
            double t = da0 / (da0 - da1);  // zero crossing in [0,1]
            double xm = lo + t * (hi - lo);
            total += 0.5 * std::abs(da0) * (xm - lo) + 0.5 * std::abs(da1) * (hi - xm);
        } else {
            total += 0.5 * (std::abs(da0) + std::abs(da1)) * (hi - lo);
        }
    }
    return total;
}

template <class MA, class MB>
double w1_via_cdf(const MA& a, const MB& b) {
    return w1_via_cdf(cdf(a), cdf(b));
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

/// Compactly supported probability density for initial data: a uniform
/// block, a finite mixture of weighted uniform blocks, or a tabulated CDF.
/// Quantiles of the analytic presets invert in closed form; tabulated CDFs
/// are inverted by leftmost-point bisection.
class InitialDensity {
public:
    struct Component {
        double weight;
        double a;
        double b;
    };

    static InitialDensity uniform(double a, double b) {
        return mixture({Component{1.0, a, b}});
    }

    static InitialDensity mixture(std::vector<Component> comps) {
        if (comps.empty()) throw std::invalid_argument("mixture: no components");
        double wsum = 0.0;
        for (const auto& c : comps) {
            if (!(c.weight > 0.0)) throw std::invalid_argument("mixture: weight must be positive");
            if (!(c.a < c.b)) throw std::invalid_argument("mixture: need a < b");
            wsum += c.weight;
        }
        if (std::abs(wsum - 1.0) > 1e-12)
            throw std::invalid_argument("mixture: weights must sum to 1");
        std::sort(comps.begin(), comps.end(),
                  [](const Component& l, const Component& r) { return l.a < r.a; });
        InitialDensity d;
        d.tabulated_ = false;
        d.comps_ = std::move(comps);
        d.build_preset_cells();
        return d;
    }

    /// Tabulated CDF: nodes (x, F), strictly increasing x, F non-decreasing
    /// from 0 to 1.
    static InitialDensity tabulated(Cdf table) {
        table.validate();
        for (std::size_t i = 0; i + 1 < table.nodes.size(); ++i)
            if (!(table.nodes[i].x < table.nodes[i + 1].x))
                throw std::invalid_argument("tabulated cdf: x must be strictly increasing");
        InitialDensity d;
        d.tabulated_ = true;
        d.table_ = std::move(table);
        PiecewiseDensity pd;
        for (const auto& n : d.table_.nodes) pd.breakpoints.push_back(n.x);
        for (std::size_t i = 0; i + 1 < d.table_.nodes.size(); ++i) {
            double df = d.table_.nodes[i + 1].F - d.table_.nodes[i].F;
            double dx = d.table_.nodes[i + 1].x - d.table_.nodes[i].x;
            pd.heights.push_back(std::max(0.0, df) / dx);
        }
        d.cells_ = std::move(pd);
        return d;
    }

    /// Two-column text file (x, F(x)), whitespace separated, '#' comments.
    static InitialDensity from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot read cdf file: " + path);
        Cdf table;
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            double x, F;
            if (ls >> x >> F) table.nodes.push_back({x, F});
        }
        if (table.nodes.size() < 2)
            throw std::runtime_error("cdf file has fewer than two rows: " + path);
        return tabulated(std::move(table));
    }

    [[nodiscard]] double support_lo() const { return cells_.breakpoints.front(); }
    [[nodiscard]] double support_hi() const { return cells_.breakpoints.back(); }

    [[nodiscard]] double cdf_at(double x) const {
        if (tabulated_) return table_(x);
        double acc = 0.0;
        for (const auto& c : comps_) {
            if (x >= c.b)
                acc += c.weight;
            else if (x > c.a)
                acc += c.weight * (x - c.a) / (c.b - c.a);
        }
        return acc;
    }

    /// Leftmost x with F(x) >= q.
    [[nodiscard]] double quantile(double q) const {
        if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q outside [0,1]");
        if (tabulated_) return quantile_bisect(q);
        if (q <= 0.0) return support_lo();
        // Closed form on the merged piecewise-linear CDF of the components.
        const auto& z = cells_.breakpoints;
        double acc = 0.0;
        for (std::size_t i = 0; i < cells_.cells(); ++i) {
            double gain = cells_.heights[i] * (z[i + 1] - z[i]);
            if (acc + gain >= q) {
                if (gain <= 0.0) continue;  // plateau cannot reach a larger q
                return z[i] + (q - acc) / cells_.heights[i];
            }
            acc += gain;
        }
        return support_hi();
    }

    /// Exact piecewise-constant representation (plateaus appear as
    /// zero-height cells).
    [[nodiscard]] const PiecewiseDensity& as_piecewise() const { return cells_; }

private:
    InitialDensity() = default;

    void build_preset_cells() {
        std::vector<double> edges;
        for (const auto& c : comps_) {
            edges.push_back(c.a);
            edges.push_back(c.b);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        cells_.breakpoints = edges;
        cells_.heights.assign(edges.size() - 1, 0.0);
        for (const auto& c : comps_) {
            double h = c.weight / (c.b - c.a);
            for (std::size_t i = 0; i + 1 < edges.size(); ++i)
                if (edges[i] >= c.a && edges[i + 1] <= c.b) cells_.heights[i] += h;
        }
        cells_.validate();
    }

    /// Leftmost-point bisection on the monotone predicate F(x) >= q,
    /// absolute tolerance 1e-12, at most 200 halvings.
    [[nodiscard]] double quantile_bisect(double q) const {
        double lo = support_lo(), hi = support_hi();
        if (table_(lo) >= q) return lo;
        int iter = 0;
        while (hi - lo > 1e-12) {
            if (++iter > 200)
                throw std::runtime_error("quantile bisection did not converge (malformed cdf)");
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;  // double resolution reached
            if (table_(mid) >= q)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

    bool tabulated_ = false;
    std::vector<Component> comps_;
    Cdf table_;
    PiecewiseDensity cells_;
};

/// Quantile discretization: positions at mass levels i/n for i = 1..n, so
/// every inter-particle gap (and the gap below the first particle) carries
/// mass exactly 1/n.  The last position is the right end of the support.
inline std::vector<double> discretize(const InitialDensity& density, int n) {
    if (n < 1) throw std::invalid_argument("discretize: n must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i)
        out[static_cast<std::size_t>(i - 1)] =
            density.quantile(static_cast<double>(i) / static_cast<double>(n));
    return out;
}

}  // namespace twospecies
