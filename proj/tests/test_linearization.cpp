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


#include <catch_amalgamated.hpp>

#include <random>

#include "reference_math.hpp"
#include "rsma/linearization.hpp"
#include "rsma/margin_barrier.hpp"

using namespace rsma;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("dispersion factor slope", "[linearization]") {
    const double fd = reference::central_difference([](double d) { return dispersion_factor(d); }, 1.0, 1e-5);
    CHECK_THAT(fd, WithinAbs(0.125 / std::sqrt(0.75), 1e-6));
    CHECK_THAT(dispersion_factor_slope(1.0), WithinAbs(0.14434, 1e-5));
    CHECK_THAT(dispersion_factor_slope(1.0), WithinAbs(fd, 1e-6));
    for (double d : {1e-3, 0.1, 0.5, 3.0, 20.0}) {
        const double f = reference::central_difference([](double x) { return dispersion_factor(x); }, d, d * 1e-4);
        CHECK_THAT(dispersion_factor_slope(d), WithinRel(f, 1e-6));
    }
    CHECK_THROWS_AS(dispersion_factor_slope(0.0), std::domain_error);
}

TEST_CASE("throughput surrogate is tangent and conservative", "[linearization]") {
    const ThroughputSurrogate s = linearize_throughput(1.0, ReliabilityTarget(1e-6), 1000.0);
    CHECK_THAT(s.penalty, WithinAbs(0.21687, 1e-5));
    CHECK_THAT(s(1.0), WithinAbs(s.exact(1.0), 1e-10));
    CHECK_THAT(s(1.0), WithinAbs((1.0 - 1e-6) * 1000.0 * (1.0 - s.penalty * std::sqrt(0.75)), 1e-10));
    const double h = 1e-5;
    const double slope_s = (s(1.0 + h) - s(1.0 - h)) / (2.0 * h);
    const double slope_e = (s.exact(1.0 + h) - s.exact(1.0 - h)) / (2.0 * h);
    CHECK_THAT(slope_s, WithinAbs(slope_e, 1e-4));
    for (double d : {0.01, 0.2, 0.7, 1.5, 4.0, 50.0}) CHECK(s(d) <= s.exact(d) + 1e-12);
}

TEST_CASE("throughput surrogate rejects bad references", "[linearization]") {
    CHECK_THROWS_AS(linearize_throughput(0.0, ReliabilityTarget(1e-6), 100.0), std::domain_error);
    CHECK_THROWS_AS(linearize_throughput(-1.0, ReliabilityTarget(1e-6), 100.0), std::domain_error);
    CHECK_THROWS_AS(linearize_throughput(1.0, ReliabilityTarget(1e-6), 0.0), std::domain_error);
}

TEST_CASE("SINR constraint linearization", "[linearization]") {
    const SystemParams sys;
    SlackState ref;
    ref.powers = {1.0, 1.0, 1.0};
    const RsmaSinrs g = rsma_sinrs(ref.powers, sys);
    ref.delta11 = g.gamma11;
    ref.delta22 = g.gamma22;
    const AffineSinrConstraint c11 = linearize_sinr(SinrConstraint::Gamma11AtLeastDelta11, ref, sys);
    const AffineSinrConstraint c22 = linearize_sinr(SinrConstraint::Gamma22AtLeastDelta22, ref, sys);
    CHECK_THAT(c11.lhs(ref.powers, ref.delta11), WithinAbs(0.0, 1e-12));
    CHECK_THAT(c22.lhs(ref.powers, ref.delta22), WithinAbs(0.0, 1e-12));
    CHECK_THAT(c11.cd, WithinAbs(1.0 / (g.gamma11 * g.gamma11), 1e-12));
    CHECK_THAT(c11.cd, WithinAbs(7.29, 1e-9));
    CHECK(c11.cd > 0.0);
    CHECK(c22.cd > 0.0);

    // P / delta is not jointly convex, so the surrogate is only conservative
    // along delta at the reference powers, and exact along P at the reference delta.
    for (double d11 : {0.05, 0.2, 0.5, 1.0, 3.0}) {
        const double exact = ref.powers.p12 * sys.g1 + ref.powers.p2 * sys.g2 + sys.noise_var -
                             ref.powers.p11 * sys.g1 / d11;
        CHECK(c11.lhs(ref.powers, d11) >= exact - 1e-12);
    }
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> p(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const PowerAllocation q{p(rng), p(rng), p(rng)};
        const double exact = q.p12 * sys.g1 + sys.noise_var - q.p2 * sys.g2 / ref.delta22;
        CHECK_THAT(c22.lhs(q, ref.delta22), WithinAbs(exact, 1e-12));
    }

    SlackState zero = ref;
    zero.delta11 = 0.0;
    CHECK_THROWS_AS(linearize_sinr(SinrConstraint::Gamma11AtLeastDelta11, zero, sys), std::domain_error);
    zero = ref;
    zero.delta22 = 0.0;
    CHECK_THROWS_AS(linearize_sinr(SinrConstraint::Gamma22AtLeastDelta22, zero, sys), std::domain_error);
}

namespace {

LogAffineConstraint affine(std::initializer_list<double> a, double b) {
    LogAffineConstraint c;
    c.a = Eigen::VectorXd(static_cast<Eigen::Index>(a.size()));
    Eigen::Index i = 0;
    for (double v : a) c.a[i++] = v;
    c.b = b;
    return c;
}

}  // namespace

TEST_CASE("margin barrier on a box", "[linearization][barrier]") {
    // 0 <= x <= 1: the best margin is 1/2 at x = 1/2.
    const std::vector<LogAffineConstraint> cons{affine({1.0}, -1.0), affine({-1.0}, 0.0)};
    const MarginResult r = MarginBarrier().solve(cons, Eigen::VectorXd::Constant(1, 5.0), MarginGoal::Maximize);
    CHECK_THAT(r.margin, WithinAbs(0.5, 1e-8));
    CHECK_THAT(r.x[0], WithinAbs(0.5, 1e-6));
    CHECK(r.margin_upper >= r.margin - 1e-12);
}

TEST_CASE("margin barrier with a log term", "[linearization][barrier]") {
    // log2(1 + x) >= 1 and x <= 3 in two variables with y free in [0, 1].
    LogAffineConstraint lg = affine({0.0, 0.0}, 1.0);
    lg.c = 1.0;
    lg.log_index = 0;
    const std::vector<LogAffineConstraint> cons{lg, affine({1.0, 0.0}, -3.0), affine({0.0, 1.0}, -1.0),
                                                affine({0.0, -1.0}, 0.0)};
    const MarginResult r = MarginBarrier().solve(cons, Eigen::Vector2d(2.0, 0.5), MarginGoal::Maximize);
    CHECK(r.margin > 0.0);
    // Same constraint with a scaled variable: log2(1 + 2 x) >= 1 means x >= 1/2.
    LogAffineConstraint scaled = lg;
    scaled.log_scale = 2.0;
    CHECK(scaled.value(Eigen::Vector2d(0.5, 0.0)) == Catch::Approx(0.0).margin(1e-15));
    CHECK_FALSE(scaled.in_domain(Eigen::Vector2d(-0.6, 0.0)));

    // Infeasible: x >= 2 and x <= 1.
    const std::vector<LogAffineConstraint> bad{affine({-1.0}, 2.0), affine({1.0}, -1.0)};
    const MarginResult d = MarginBarrier().solve(bad, Eigen::VectorXd::Zero(1), MarginGoal::Decide);
    CHECK(d.margin < 0.0);
    CHECK(d.margin_upper < 0.0);
}
