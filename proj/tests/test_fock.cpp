#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "entlink/errors.hpp"
#include "entlink/fock.hpp"
#include "entlink/rng.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace fock = entlink::fock;
using entlink::LayoutMismatch;
using entlink::LeakageExceeded;
using entlink::TruncationOverflow;
using entlink::UnknownMode;
using fock::Complex;
using fock::FockStateVector;
using fock::ModeLayout;
using oracles::modes;
using oracles::occ;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Deterministic pseudo-random state: amplitudes from a fixed rng stream so
// every run exercises the same "generic" vector.
FockStateVector random_state(const ModeLayout& layout, std::uint64_t id) {
    entlink::rng::Stream stream(424242, id);
    FockStateVector state(layout);
    for (Eigen::Index i = 0; i < state.amplitudes().size(); ++i) {
        state.amplitudes()(i) =
            Complex(stream.uniform() - 0.5, stream.uniform() - 0.5);
    }
    return state.normalized();
}

Eigen::VectorXcd apply_dense(const Eigen::MatrixXcd& op, const FockStateVector& in) {
    return op * in.amplitudes();
}

double max_abs_diff(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("mode layout indexes occupation tuples row-major, last mode fastest") {
    const ModeLayout layout(modes({"a", "b"}), 2);
    CHECK(layout.dim() == 9);
    CHECK(layout.mode_count() == 2);
    CHECK(layout.mode_index("a") == 0);
    CHECK(layout.mode_index("b") == 1);
    CHECK(layout.stride(0) == 3);
    CHECK(layout.stride(1) == 1);
    CHECK(layout.index_of(occ({1, 2})) == 5);
    CHECK(layout.occupations(5) == occ({1, 2}));
    CHECK(layout.occupation(7, 0) == 2);
    CHECK(layout.occupation(7, 1) == 1);
    for (std::size_t i = 0; i < layout.dim(); ++i) {
        CHECK(layout.index_of(layout.occupations(i)) == i);
    }

    CHECK_THROWS_AS(layout.mode_index("c"), UnknownMode);
    CHECK_THROWS_AS(layout.index_of(occ({1})), std::invalid_argument);
    CHECK_THROWS_AS(layout.index_of(occ({3, 0})), std::invalid_argument);
    CHECK_THROWS_AS(layout.index_of(occ({-1, 0})), std::invalid_argument);
    CHECK_THROWS_AS(ModeLayout({}, 2), std::invalid_argument);
    CHECK_THROWS_AS(ModeLayout(modes({"a", "a"}), 2), std::invalid_argument);
    CHECK_THROWS_AS(ModeLayout(modes({"a"}), -1), std::invalid_argument);
    CHECK_THROWS_AS(ModeLayout(modes({"a", "b"}), 100000), std::invalid_argument);
}

TEST_CASE("state vectors support basis construction and linear algebra") {
    const ModeLayout layout(modes({"a", "b"}), 3);
    const auto vac = FockStateVector::vacuum(layout);
    CHECK(vac.squared_norm() == doctest::Approx(1.0));
    CHECK(vac.at(occ({0, 0})) == Complex(1.0, 0.0));

    auto one = FockStateVector::basis_state(layout, occ({1, 2}));
    CHECK(one.at(occ({1, 2})) == Complex(1.0, 0.0));
    CHECK(one.squared_norm() == doctest::Approx(1.0));

    const auto sum = (vac + one * Complex(0.0, 1.0)).normalized();
    CHECK(sum.squared_norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(sum.at(occ({0, 0})) - Complex(1.0 / std::sqrt(2.0), 0.0)) < 1e-14);
    CHECK(vac.inner(sum) == sum.at(occ({0, 0})));

    const ModeLayout other(modes({"a", "c"}), 3);
    const auto foreign = FockStateVector::vacuum(other);
    CHECK_THROWS_AS(vac + foreign, LayoutMismatch);
    CHECK_THROWS_AS(vac - foreign, LayoutMismatch);
    CHECK_THROWS_AS(vac.inner(foreign), LayoutMismatch);
    CHECK_THROWS_AS(FockStateVector(layout).normalized(), std::invalid_argument);
}

TEST_CASE("ladder operators match the dense matrix oracle") {
    const int n_max = 3;
    const ModeLayout layout(modes({"x", "y", "z"}), n_max);
    const int d = n_max + 1;
    const auto state = random_state(layout, 1);

    for (std::size_t m = 0; m < 3; ++m) {
        const auto dense_up = oracles::on_mode(oracles::creation_matrix(d), m, 3, d);
        const auto dense_down = oracles::on_mode(oracles::annihilation_matrix(d), m, 3, d);
        // Zero the top occupation so creation stays inside the truncation.
        auto trimmed = state;
        for (std::size_t i = 0; i < layout.dim(); ++i) {
            if (layout.occupation(i, m) == n_max) {
                trimmed.amplitudes()(static_cast<Eigen::Index>(i)) = 0.0;
            }
        }
        const auto& name = layout.modes()[m];
        const auto up = fock::apply_ladder(trimmed, name, fock::Ladder::creation);
        CHECK(max_abs_diff(up.amplitudes(), apply_dense(dense_up, trimmed)) < 1e-13);
        const auto down = fock::apply_ladder(state, name, fock::Ladder::annihilation);
        CHECK(max_abs_diff(down.amplitudes(), apply_dense(dense_down, state)) < 1e-13);
    }
}

TEST_CASE("ladder operators respect boson algebra on basis states") {
    const ModeLayout layout(modes({"a"}), 5);
    auto n2 = FockStateVector::basis_state(layout, occ({2}));
    const auto up = fock::apply_ladder(n2, "a", fock::Ladder::creation);
    CHECK(std::abs(up.at(occ({3})) - Complex(std::sqrt(3.0), 0.0)) < 1e-14);
    const auto down = fock::apply_ladder(n2, "a", fock::Ladder::annihilation);
    CHECK(std::abs(down.at(occ({1})) - Complex(std::sqrt(2.0), 0.0)) < 1e-14);

    const auto vac = FockStateVector::vacuum(layout);
    CHECK(fock::apply_ladder(vac, "a", fock::Ladder::annihilation).squared_norm() ==
          doctest::Approx(0.0));

    auto top = FockStateVector::basis_state(layout, occ({5}));
    CHECK_THROWS_AS(fock::apply_ladder(top, "a", fock::Ladder::creation),
                    TruncationOverflow);
    CHECK_THROWS_AS(fock::apply_ladder(vac, "nope", fock::Ladder::creation), UnknownMode);
}

TEST_CASE("two-mode squeeze of vacuum has the exact thermal amplitude ladder") {
    const double r = 0.4;
    const int n_max = 24;
    const ModeLayout layout(modes({"s", "i"}), n_max);
    const auto out = fock::two_mode_squeeze(FockStateVector::vacuum(layout), "s", "i", r);

    const double sech = 1.0 / std::cosh(r);
    const double lam = std::tanh(r);
    for (int n = 0; n <= n_max; ++n) {
        CHECK(std::abs(out.at(occ({n, n})) - Complex(sech * std::pow(lam, n), 0.0)) <
              1e-12);
    }
    // Everything off the diagonal stays empty.
    CHECK(std::abs(out.at(occ({1, 0}))) < 1e-15);
    CHECK(std::abs(out.at(occ({3, 5}))) < 1e-15);
    // Norm deficit is the exact tail mass tanh(r)^(2(n_max+1)).
    const double leak = 1.0 - out.squared_norm();
    CHECK(leak == doctest::Approx(std::pow(lam * lam, n_max + 1)).epsilon(1e-9));
}

TEST_CASE("two-mode squeeze of a seeded mode reproduces the closed-form amplitudes") {
    const double r = 0.35;
    const int n_max = 24;
    const ModeLayout layout(modes({"s", "i"}), n_max);
    const auto seeded = FockStateVector::basis_state(layout, occ({1, 0}));
    const auto out = fock::two_mode_squeeze(seeded, "s", "i", r);

    // exp(r(ab^dag... )) |1,0> has amplitudes sech^2 r * sqrt(n+1) tanh^n r
    // on |n+1, n>.
    const double sech = 1.0 / std::cosh(r);
    const double lam = std::tanh(r);
    for (int n = 0; n + 1 <= n_max; ++n) {
        CHECK(std::abs(out.at(occ({n + 1, n})) -
                       Complex(sech * sech * std::sqrt(n + 1.0) * std::pow(lam, n), 0.0)) <
              1e-12);
    }
}

TEST_CASE("two-mode squeeze equals the projected dense-exponential oracle") {
    const double r = 0.3;
    const int n_small = 6;
    const int n_big = 18;
    const ModeLayout small(modes({"s", "i"}), n_small);
    const ModeLayout big(modes({"s", "i"}), n_big);
    const int db = n_big + 1;

    // Dense generator r (a^dag b^dag - a b) on the padded space; its
    // exponential, projected onto the small space, is the reference.  The
    // padding suppresses edge reflections far below the tolerance.
    const Eigen::MatrixXcd up =
        oracles::on_mode(oracles::creation_matrix(db), 0, 2, db) *
        oracles::on_mode(oracles::creation_matrix(db), 1, 2, db);
    const Eigen::MatrixXcd generator = r * (up - up.adjoint().eval());
    const Eigen::MatrixXcd evolution = oracles::taylor_expm(generator);

    const std::vector<std::vector<int>> inputs = {
        occ({0, 0}), occ({1, 0}), occ({2, 1}), occ({3, 3})};
    for (const auto& occupations : inputs) {
        const auto in_small = FockStateVector::basis_state(small, occupations);
        const auto out_small = fock::two_mode_squeeze(in_small, "s", "i", r, 0.5);

        const auto in_big = FockStateVector::basis_state(big, occupations);
        const Eigen::VectorXcd out_big = evolution * in_big.amplitudes();
        for (std::size_t idx = 0; idx < small.dim(); ++idx) {
            const auto tuple = small.occupations(idx);
            const auto big_idx = static_cast<Eigen::Index>(big.index_of(tuple));
            CHECK(std::abs(out_small.amplitudes()(static_cast<Eigen::Index>(idx)) -
                           out_big(big_idx)) < 1e-10);
        }
    }

    // Linearity carries the check to superpositions as well; spot-check one.
    const auto mixed_small =
        (FockStateVector::basis_state(small, occ({0, 0})) +
         FockStateVector::basis_state(small, occ({1, 1})) * Complex(0.3, -0.4))
            .normalized();
    const auto out_small = fock::two_mode_squeeze(mixed_small, "s", "i", r, 0.5);
    FockStateVector mixed_big(big);
    for (std::size_t idx = 0; idx < small.dim(); ++idx) {
        mixed_big.amplitudes()(static_cast<Eigen::Index>(big.index_of(
            small.occupations(idx)))) =
            mixed_small.amplitudes()(static_cast<Eigen::Index>(idx));
    }
    const Eigen::VectorXcd out_big = evolution * mixed_big.amplitudes();
    for (std::size_t idx = 0; idx < small.dim(); ++idx) {
        const auto big_idx =
            static_cast<Eigen::Index>(big.index_of(small.occupations(idx)));
        CHECK(std::abs(out_small.amplitudes()(static_cast<Eigen::Index>(idx)) -
                       out_big(big_idx)) < 1e-10);
    }
}

TEST_CASE("two-mode squeeze enforces the leakage budget") {
    const ModeLayout layout(modes({"s", "i"}), 4);
    const auto vac = FockStateVector::vacuum(layout);

    CHECK_THROWS_AS(fock::two_mode_squeeze(vac, "s", "i", 1.5, 1e-8), LeakageExceeded);
    try {
        fock::two_mode_squeeze(vac, "s", "i", 1.5, 1e-8);
    } catch (const LeakageExceeded& err) {
        CHECK(err.leaked > 1e-8);
        CHECK(err.tolerance == 1e-8);
        CHECK(err.n_max == 4);
    }

    // With a loose budget the same call succeeds and reports the exact tail.
    const auto out = fock::two_mode_squeeze(vac, "s", "i", 1.5, 0.5);
    const double lam2 = std::pow(std::tanh(1.5), 2.0);
    CHECK(1.0 - out.squared_norm() == doctest::Approx(std::pow(lam2, 5)).epsilon(1e-9));

    CHECK_THROWS_AS(fock::two_mode_squeeze(vac, "s", "s", 0.1), std::invalid_argument);
    CHECK_THROWS_AS(fock::two_mode_squeeze(vac, "s", "i", -0.1), std::invalid_argument);
}

TEST_CASE("polarization rotation implements Malus amplitudes and signs") {
    const ModeLayout layout(modes({"h", "v"}), 2);
    const auto photon_h = FockStateVector::basis_state(layout, occ({1, 0}));

    for (double theta : {0.0, 30.0, 45.0, 90.0, 120.0}) {
        const auto rotated = fock::rotate_polarization(photon_h, "h", "v", theta);
        const double c = std::cos(theta * kPi / 180.0);
        const double s = std::sin(theta * kPi / 180.0);
        // New h amplitude cos(theta), new v amplitude -sin(theta): a photon at
        // angle theta lands entirely in the h mode of a frame rotated by
        // theta, and P(h) follows cos^2.
        CHECK(std::abs(rotated.at(occ({1, 0})) - Complex(c, 0.0)) < 1e-12);
        CHECK(std::abs(rotated.at(occ({0, 1})) - Complex(-s, 0.0)) < 1e-12);
        CHECK(rotated.squared_norm() == doctest::Approx(1.0).epsilon(1e-12));
    }

    // Two photons pick up the sign twice: |2,0> at 90 degrees is +|0,2>.
    const auto two = FockStateVector::basis_state(layout, occ({2, 0}));
    const auto flipped = fock::rotate_polarization(two, "h", "v", 90.0);
    CHECK(std::abs(flipped.at(occ({0, 2})) - Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("polarization rotations compose and invert") {
    const ModeLayout layout(modes({"h", "v", "w"}), 3);
    const auto state = random_state(layout, 2);

    const auto ab = fock::rotate_polarization(
        fock::rotate_polarization(state, "h", "v", 13.0), "h", "v", 24.0);
    const auto once = fock::rotate_polarization(state, "h", "v", 37.0);
    CHECK(max_abs_diff(ab.amplitudes(), once.amplitudes()) < 1e-12);

    const auto round_trip = fock::rotate_polarization(
        fock::rotate_polarization(state, "h", "v", 61.0), "h", "v", -61.0);
    CHECK(max_abs_diff(round_trip.amplitudes(), state.amplitudes()) < 1e-12);
    CHECK(once.squared_norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("polarization rotation matches the dense exponential oracle") {
    const int n_max = 3;
    const ModeLayout layout(modes({"h", "v"}), n_max);
    const int d = n_max + 1;
    const auto state = random_state(layout, 3);

    const double theta = 37.0 * kPi / 180.0;
    const auto raise_h = oracles::on_mode(oracles::creation_matrix(d), 0, 2, d);
    const auto lower_h = oracles::on_mode(oracles::annihilation_matrix(d), 0, 2, d);
    const auto raise_v = oracles::on_mode(oracles::creation_matrix(d), 1, 2, d);
    const auto lower_v = oracles::on_mode(oracles::annihilation_matrix(d), 1, 2, d);
    const Eigen::MatrixXcd generator = theta * (raise_h * lower_v - raise_v * lower_h);
    const Eigen::VectorXcd expected =
        oracles::taylor_expm(generator) * state.amplitudes();

    const auto rotated = fock::rotate_polarization(state, "h", "v", 37.0);
    CHECK(max_abs_diff(rotated.amplitudes(), expected) < 1e-12);
}

TEST_CASE("density rotation agrees with rotating the pure state") {
    const ModeLayout layout(modes({"h", "v"}), 2);
    const auto state = random_state(layout, 4);
    const auto rho = fock::DensityOperator::from_pure(state);

    const auto rotated_rho = fock::rotate_polarization(rho, "h", "v", 28.0);
    const auto rotated_state = fock::rotate_polarization(state, "h", "v", 28.0);
    const auto expected = fock::DensityOperator::from_pure(rotated_state);
    CHECK((rotated_rho.matrix() - expected.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(rotated_rho.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("density operators expose trace, purity, and validation") {
    const ModeLayout layout(modes({"a"}), 1);
    const auto zero = FockStateVector::basis_state(layout, occ({0}));
    const auto one = FockStateVector::basis_state(layout, occ({1}));

    auto mixed = fock::DensityOperator(layout);
    mixed.accumulate(0.5, zero);
    mixed.accumulate(0.5, one);
    CHECK(mixed.trace_real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mixed.purity() == doctest::Approx(0.5).epsilon(1e-14));
    mixed.validate();

    auto pure = fock::DensityOperator::from_pure((zero + one).normalized());
    CHECK(pure.purity() == doctest::Approx(1.0).epsilon(1e-13));
    pure.validate();

    auto broken = fock::DensityOperator(layout);
    broken.matrix()(0, 1) = Complex(0.3, 0.0);
    broken.matrix()(0, 0) = Complex(1.0, 0.0);
    CHECK_THROWS_AS(broken.validate(), std::runtime_error);
}

TEST_CASE("partial trace reduces pure products to pure factors") {
    const ModeLayout layout(modes({"a", "b"}), 2);
    // |1>_a ox (|0>+|2>)/sqrt(2)_b.
    auto product = FockStateVector(layout);
    product.at(occ({1, 0})) = Complex(1.0 / std::sqrt(2.0), 0.0);
    product.at(occ({1, 2})) = Complex(1.0 / std::sqrt(2.0), 0.0);
    const auto rho = fock::DensityOperator::from_pure(product);

    const std::vector<std::string> keep_a{"a"};
    const auto reduced_a = fock::partial_trace(rho, keep_a);
    CHECK(reduced_a.layout().mode_count() == 1);
    CHECK(reduced_a.trace_real() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(reduced_a.purity() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(reduced_a.matrix()(1, 1) - Complex(1.0, 0.0)) < 1e-13);

    const std::vector<std::string> keep_b{"b"};
    const auto reduced_b = fock::partial_trace(rho, keep_b);
    CHECK(reduced_b.purity() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(reduced_b.matrix()(0, 2) - Complex(0.5, 0.0)) < 1e-13);
}

TEST_CASE("partial trace of an entangled pair is maximally mixed") {
    const ModeLayout layout(modes({"a", "b"}), 1);
    auto pair = FockStateVector(layout);
    pair.at(occ({0, 0})) = Complex(1.0 / std::sqrt(2.0), 0.0);
    pair.at(occ({1, 1})) = Complex(1.0 / std::sqrt(2.0), 0.0);
    const auto rho = fock::DensityOperator::from_pure(pair);

    const std::vector<std::string> keep{"b"};
    const auto reduced = fock::partial_trace(rho, keep);
    CHECK(reduced.purity() == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(std::abs(reduced.matrix()(0, 0) - Complex(0.5, 0.0)) < 1e-13);
    CHECK(std::abs(reduced.matrix()(1, 1) - Complex(0.5, 0.0)) < 1e-13);
    CHECK(std::abs(reduced.matrix()(0, 1)) < 1e-13);
}

TEST_CASE("partial trace matches the reshaped-vector oracle on a generic state") {
    const ModeLayout layout(modes({"a", "b", "c"}), 2);
    const auto state = random_state(layout, 5);
    const auto rho = fock::DensityOperator::from_pure(state);

    // Keep (a, c): reshape the amplitude tensor into a (kept x traced) matrix
    // Psi and compare against Psi Psi^dag.
    const ModeLayout kept_layout(modes({"a", "c"}), 2);
    Eigen::MatrixXcd psi(kept_layout.dim(), 3);
    for (std::size_t i = 0; i < layout.dim(); ++i) {
        const auto tuple = layout.occupations(i);
        const auto row = kept_layout.index_of(occ({tuple[0], tuple[2]}));
        psi(static_cast<Eigen::Index>(row), tuple[1]) =
            state.amplitudes()(static_cast<Eigen::Index>(i));
    }
    const Eigen::MatrixXcd expected = psi * psi.adjoint();

    const std::vector<std::string> keep{"a", "c"};
    const auto reduced = fock::partial_trace(rho, keep);
    CHECK(reduced.layout().modes() == modes({"a", "c"}));
    CHECK((reduced.matrix() - expected).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(reduced.trace_real() == doctest::Approx(1.0).epsilon(1e-13));

    const std::vector<std::string> all{"a", "b", "c"};
    const auto same = fock::partial_trace(rho, all);
    CHECK((same.matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-14);

    const std::vector<std::string> none;
    CHECK_THROWS_AS(fock::partial_trace(rho, none), std::invalid_argument);
    const std::vector<std::string> dup{"a", "a"};
    CHECK_THROWS_AS(fock::partial_trace(rho, dup), std::invalid_argument);
    const std::vector<std::string> missing{"q"};
    CHECK_THROWS_AS(fock::partial_trace(rho, missing), UnknownMode);
}

TEST_CASE("count distributions aggregate squared amplitudes in caller order") {
    const ModeLayout layout(modes({"a", "b"}), 1);
    auto state = FockStateVector(layout);
    state.at(occ({0, 0})) = Complex(std::sqrt(0.1), 0.0);
    state.at(occ({0, 1})) = Complex(0.0, std::sqrt(0.2));
    state.at(occ({1, 0})) = Complex(-std::sqrt(0.3), 0.0);
    state.at(occ({1, 1})) = Complex(0.0, -std::sqrt(0.4));

    const std::vector<std::string> ab{"a", "b"};
    const auto dist = fock::count_distribution(state, ab);
    REQUIRE(dist.support.size() == 4);
    CHECK(dist.total() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(dist.modes == ab);
    // Row-major in the requested order: (0,0), (0,1), (1,0), (1,1).
    CHECK(dist.probabilities[0] == doctest::Approx(0.1).epsilon(1e-13));
    CHECK(dist.probabilities[1] == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(dist.probabilities[2] == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(dist.probabilities[3] == doctest::Approx(0.4).epsilon(1e-13));
    CHECK(dist.mean_occupation(0) == doctest::Approx(0.7).epsilon(1e-13));
    CHECK(dist.mean_occupation(1) == doctest::Approx(0.6).epsilon(1e-13));
    CHECK(dist.marginal(0, 1) == doctest::Approx(0.7).epsilon(1e-13));
    CHECK(dist.marginal(1, 0) == doctest::Approx(0.4).epsilon(1e-13));

    // Swapping the requested order swaps the tuple components.
    const std::vector<std::string> ba{"b", "a"};
    const auto swapped = fock::count_distribution(state, ba);
    CHECK(swapped.probabilities[1] == doctest::Approx(0.3).epsilon(1e-13));
    CHECK(swapped.probabilities[2] == doctest::Approx(0.2).epsilon(1e-13));

    // Marginalizing over b from the density operator gives the same numbers.
    const auto rho = fock::DensityOperator::from_pure(state);
    const std::vector<std::string> just_a{"a"};
    const auto from_state = fock::count_distribution(state, just_a);
    const auto from_rho = fock::count_distribution(rho, just_a);
    REQUIRE(from_state.support.size() == from_rho.support.size());
    for (std::size_t i = 0; i < from_state.support.size(); ++i) {
        CHECK(from_state.probabilities[i] ==
              doctest::Approx(from_rho.probabilities[i]).epsilon(1e-13));
    }

    const std::vector<std::string> none;
    CHECK_THROWS_AS(fock::count_distribution(state, none), std::invalid_argument);
}
