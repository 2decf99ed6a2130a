// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Small dense convex feasibility by margin maximization:
//
//     maximize s  subject to  g_k(x) + s <= 0,  k = 1..m
//
// with every g_k of the form a.x + b - c log2(1 + w x_j), c, w >= 0 (affine when
// c = 0). Solved with a log-barrier path-following method and damped Newton
// centering. The problem is feasible iff the optimal margin is >= 0.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace rsma {

struct LogAffineConstraint {
    Eigen::VectorXd a;
    double b = 0.0;
    double c = 0.0;          // weight of the -log2(1 + w x[log_index]) term
    double log_scale = 1.0;  // w
    int log_index = -1;

    [[nodiscard]] double value(const Eigen::VectorXd& x) const {
        double v = a.dot(x) + b;
        if (log_index >= 0) v -= c * std::log2(1.0 + log_scale * x[log_index]);
        return v;
    }

    [[nodiscard]] bool in_domain(const Eigen::VectorXd& x) const {
        return log_index < 0 || 1.0 + log_scale * x[log_index] > 0.0;
    }

    /// Rescale an affine constraint to unit gradient norm.
    void normalize() {
        if (log_index >= 0) return;
        const double norm = a.norm();
        if (norm > 0.0) {
            a /= norm;
            b /= norm;
        }
    }
};

struct MarginBarrierOptions {
    double t0 = 1.0;
    double mu = 12.0;
    double gap_tol = 1e-10;
    double newton_tol = 1e-12;
    int max_newton = 80;
    int max_outer = 40;
};

struct MarginResult {
    Eigen::VectorXd x;
    double margin = -std::numeric_limits<double>::infinity();
    double margin_upper = std::numeric_limits<double>::infinity();  // certified bound on the optimum
    int newton_steps = 0;
};

enum class MarginGoal {
    Maximize,   // follow the path until the duality gap is below gap_tol
    Decide,     // stop once the sign of the optimal margin is known
};

class MarginBarrier {
public:
    explicit MarginBarrier(MarginBarrierOptions opts = {}) : opts_(opts) {}

    [[nodiscard]] MarginResult solve(const std::vector<LogAffineConstraint>& cons, const Eigen::VectorXd& x0,
                                     MarginGoal goal) const {
        const int d = static_cast<int>(x0.size());
        const int m = static_cast<int>(cons.size());
        Eigen::VectorXd z(d + 1);
        z.head(d) = x0;
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& g : cons) worst = std::max(worst, g.value(x0));
        z[d] = -worst - 1.0;

        MarginResult res;
        double t = opts_.t0;
        for (int outer = 0; outer < opts_.max_outer; ++outer) {
            res.newton_steps += center(cons, z, t);
            const double s = z[d];
            const double gap = static_cast<double>(m) / t;
            res.margin = s;
            res.margin_upper = s + gap;
            if (goal == MarginGoal::Decide && (s > 0.0 || s + gap < 0.0)) break;
            if (gap < opts_.gap_tol) break;
            t *= opts_.mu;
        }
        res.x = z.head(d);
        // Report the true margin of the returned point rather than the
        // barrier variable, which lags slightly behind.
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& g : cons) margin = std::min(margin, -g.value(res.x));
        res.margin = margin;
        return res;
    }

private:
    // Barrier objective -t s - sum log(-g_k(x) - s); +inf outside the domain.
    static double barrier(const std::vector<LogAffineConstraint>& cons, const Eigen::VectorXd& z, double t) {
        const int d = static_cast<int>(z.size()) - 1;
        const Eigen::VectorXd x = z.head(d);
        double f = -t * z[d];
        for (const auto& g : cons) {
            if (!g.in_domain(x)) return std::numeric_limits<double>::infinity();
            const double u = -g.value(x) - z[d];
            if (!(u > 0.0)) return std::numeric_limits<double>::infinity();
            f -= std::log(u);
        }
        return f;
    }

    int center(const std::vector<LogAffineConstraint>& cons, Eigen::VectorXd& z, double t) const {
        const int n = static_cast<int>(z.size());
        const int d = n - 1;
        int steps = 0;
        Eigen::VectorXd grad(n);
        Eigen::MatrixXd hess(n, n);
        Eigen::VectorXd row(n);
        for (; steps < opts_.max_newton; ++steps) {
            const Eigen::VectorXd x = z.head(d);
            grad.setZero();
            grad[d] = -t;
            hess.setZero();
            for (const auto& g : cons) {
                const double u = -g.value(x) - z[d];
                row.head(d) = g.a;
                row[d] = 1.0;
                double curv = 0.0;
                if (g.log_index >= 0) {
                    const double w = g.log_scale;
                    const double q = 1.0 + w * x[g.log_index];
                    row[g.log_index] -= g.c * w / (q * std::numbers::ln2);
                    curv = g.c * w * w / (q * q * std::numbers::ln2);
                }
                grad += row / u;
                hess.noalias() += row * row.transpose() / (u * u);
                if (curv > 0.0) hess(g.log_index, g.log_index) += curv / u;
            }
            Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
            Eigen::VectorXd step = ldlt.solve(-grad);
            if (ldlt.info() != Eigen::Success || !step.allFinite()) {
                hess.diagonal().array() += 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
                step = hess.ldlt().solve(-grad);
                if (!step.allFinite()) break;
            }
            const double decrement = -grad.dot(step);
            if (decrement * 0.5 <= opts_.newton_tol) break;

            const double f0 = barrier(cons, z, t);
            double alpha = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                const Eigen::VectorXd trial = z + alpha * step;
                const double f1 = barrier(cons, trial, t);
                if (std::isfinite(f1) && f1 <= f0 - 0.25 * alpha * decrement) {
                    z = trial;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!moved) break;
        }
        return steps;
    }

    MarginBarrierOptions opts_;
};

}  // namespace rsma
