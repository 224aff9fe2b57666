#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace heterokink::detail {

struct SimplexResult2 {
    std::array<double, 2> x{};
    double f = 0.0;
    int evaluations = 0;
};

/// Nelder-Mead on R^2 with standard coefficients. Stops at f <= f_target,
/// simplex diameter below x_tol (per coordinate, relative to `scale`), or
/// after max_evals. Restarts from the best vertex `restarts` times.
template <class F>
SimplexResult2 nelder_mead2(F&& f, std::array<double, 2> x0, std::array<double, 2> scale,
                            double f_target, double x_tol, int max_evals, int restarts = 2) {
    using P = std::array<double, 2>;
    SimplexResult2 best{x0, f(x0), 1};
    for (int round = 0; round <= restarts; ++round) {
        std::array<P, 3> v{best.x, best.x, best.x};
        v[1][0] += scale[0];
        v[2][1] += scale[1];
        std::array<double, 3> fv{best.f, f(v[1]), f(v[2])};
        best.evaluations += 2;
        while (best.evaluations < max_evals) {
            std::array<int, 3> idx{0, 1, 2};
            std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
            const P lo = v[idx[0]], mid = v[idx[1]], hi = v[idx[2]];
            const double flo = fv[idx[0]], fmid = fv[idx[1]], fhi = fv[idx[2]];
            if (flo <= f_target) break;
            double diam = 0.0;
            for (int d = 0; d < 2; ++d) {
                diam = std::max({diam, std::abs(mid[d] - lo[d]) / scale[d], std::abs(hi[d] - lo[d]) / scale[d]});
            }
            if (diam < x_tol) break;
            const P c{(lo[0] + mid[0]) / 2, (lo[1] + mid[1]) / 2};
            auto along = [&](double t) { return P{c[0] + t * (hi[0] - c[0]), c[1] + t * (hi[1] - c[1])}; };
            const P xr = along(-1.0);
            const double fr = f(xr);
            ++best.evaluations;
            if (fr < flo) {
                const P xe = along(-2.0);
                const double fe = f(xe);
                ++best.evaluations;
                if (fe < fr) {
                    v[idx[2]] = xe;
                    fv[idx[2]] = fe;
                } else {
                    v[idx[2]] = xr;
                    fv[idx[2]] = fr;
                }
                continue;
            }
            if (fr < fmid) {
                v[idx[2]] = xr;
                fv[idx[2]] = fr;
                continue;
            }
            const bool outside = fr < fhi;
            const P xc = along(outside ? -0.5 : 0.5);
            const double fc = f(xc);
            ++best.evaluations;
            if (fc < (outside ? fr : fhi)) {
                v[idx[2]] = xc;
                fv[idx[2]] = fc;
                continue;
            }
            for (int j : {idx[1], idx[2]}) {
                v[j] = P{lo[0] + 0.5 * (v[j][0] - lo[0]), lo[1] + 0.5 * (v[j][1] - lo[1])};
                fv[j] = f(v[j]);
                ++best.evaluations;
            }
        }
        const int ib = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
        if (fv[ib] < best.f) {
            best.f = fv[ib];
            best.x = v[ib];
        }
        if (best.f <= f_target || best.evaluations >= max_evals) break;
        scale = {scale[0] * 0.1, scale[1] * 0.1};
    }
    return best;
}

}  // namespace heterokink::detail
