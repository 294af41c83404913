#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "delaymargin/constant_delay.hpp"
#include "delaymargin/eigen.hpp"

using namespace delaymargin;
using namespace std::complex_literals;

namespace {

// any closed loop can be realized with A = 0, B = I, k = target
PlantModel model_with_closed_loop(const Matrix& target, double r) {
    const std::size_t n = target.rows();
    return PlantModel(Matrix(n, n), Matrix::identity(n), target, r);
}

}  // namespace

TEST_CASE("char_eval_scalar identities") {
    CHECK(std::abs(char_eval_scalar(2.0, 1.0, -1.0 + 0.0i)) < 1e-14);
    CHECK(char_eval_scalar(2.0, 1.0, 0.0 + 0.0i).real() ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(char_eval_scalar(1.0, 1.0, 0.0 + 0.0i), DomainError);
    CHECK_THROWS_AS(char_eval_scalar(2.0, -0.1, 0.0 + 0.0i), ValidationError);
}

TEST_CASE("char_eval_matrix collapses at tau = r") {
    const Matrix target{{-1.0, 0.5}, {0.0, -2.0}};
    const PlantModel model = model_with_closed_loop(target, 1.0);
    for (CharForm form : {CharForm::ReducedX, CharForm::ReducedP}) {
        // eigenvalues of A+Bk are roots when the delayed terms cancel
        CHECK(std::abs(char_eval_matrix(model, 1.0, -1.0 + 0.0i, form)) < 1e-12);
        CHECK(std::abs(char_eval_matrix(model, 1.0, -2.0 + 0.0i, form)) < 1e-12);
        // det(-CL) = det(diag(1, 2)) = 2 at s = 0
        CHECK(char_eval_matrix(model, 1.0, 0.0 + 0.0i, form).real() ==
              doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("char_eval_matrix equals char_eval_scalar for the n = 1 example") {
    for (double p : {1.5, 2.0, 4.0}) {
        const PlantModel model = example_plant(p);
        for (double tau : {0.0, 0.3, 0.805, 1.0, 1.2, 3.0}) {
            for (const auto s :
                 {0.0 + 0.0i, -1.0 + 0.0i, 0.2 + 3.0i, -0.5 - 2.0i, 1.0 + 0.5i}) {
                const auto scalar = char_eval_scalar(p, tau, s);
                for (CharForm form : {CharForm::ReducedX, CharForm::ReducedP}) {
                    const auto matrix = char_eval_matrix(model, tau, s, form);
                    CHECK(std::abs(matrix - scalar) <=
                          1e-12 * (1.0 + std::abs(scalar)));
                }
            }
        }
    }
}

TEST_CASE("crossing_curve boundary identities at p = 2") {
    const StabilityWindow win = crossing_curve(2.0);
    CHECK_FALSE(win.open_below);
    CHECK_FALSE(win.open_above);
    CHECK(win.tau_min > 0.0);
    CHECK(win.tau_min < 1.0);
    CHECK(win.tau_max > 1.0);

    // values pinned by an independent high-precision run of the procedure
    CHECK(win.tau_min == doctest::Approx(0.805359421336260).epsilon(1e-9));
    CHECK(win.tau_max == doctest::Approx(1.197465884870107).epsilon(1e-9));

    // the step-(ii) unit-circle identity holds at every step-(i) root
    const double pe = 2.0 * std::exp(1.0);
    for (double w : win.omega_roots) {
        const double c = std::cos(w) - 1.0 / pe;
        const double s = std::sin(w) + w / pe;
        CHECK(std::abs(c * c + s * s - 1.0) <= 1e-9);
    }
    // every boundary pair is a genuine imaginary-axis root
    for (const auto& b : win.boundary) {
        CHECK(std::abs(char_eval_scalar(2.0, b.tau, 1.0i * b.omega)) <= 1e-6);
    }
}

TEST_CASE("crossing window versus the measurable bound") {
    for (double p : {1.5, 2.0, 3.0, 5.0}) {
        const StabilityWindow win = crossing_curve(p);
        const double eps = scalar_bound(p);
        const double half_width = 0.5 * (win.tau_max - win.tau_min);
        CHECK(eps / half_width > 0.35);
        CHECK(eps / half_width < 0.65);
        // the certified measurable bound is conservative on both sides
        CHECK(eps < 1.0 - win.tau_min);
        CHECK(eps < win.tau_max - 1.0);
    }
}

TEST_CASE("rightmost_root at the nominal delay recovers the finite spectrum") {
    const auto scalar = rightmost_root_scalar(2.0, 1.0, 48);
    CHECK(scalar.refined);
    CHECK(scalar.root.real() == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(std::abs(scalar.root.imag()) < 1e-8);

    const Matrix target{{-1.0, 0.5}, {0.0, -2.0}};
    const PlantModel model = model_with_closed_loop(target, 1.0);
    const auto matrix_case = rightmost_root(model, 1.0, 48);
    CHECK(matrix_case.root.real() ==
          doctest::Approx(spectral_abscissa(target)).epsilon(1e-6));
}

TEST_CASE("rightmost_root crosses the axis at the window boundary") {
    const StabilityWindow win = crossing_curve(2.0);
    for (double boundary : {win.tau_min, win.tau_max}) {
        const auto at = rightmost_root_scalar(2.0, boundary, 64);
        CHECK(std::abs(at.root.real()) <= 1e-4);
        const auto below = rightmost_root_scalar(2.0, boundary - 1e-3, 64);
        const auto above = rightmost_root_scalar(2.0, boundary + 1e-3, 64);
        CHECK(below.root.real() * above.root.real() < 0.0);
    }
    const auto mid =
        rightmost_root_scalar(2.0, 0.5 * (win.tau_min + win.tau_max), 64);
    CHECK(mid.root.real() < 0.0);
    const auto far = rightmost_root_scalar(2.0, 3.0, 64);
    CHECK(far.root.real() > 0.0);
}

TEST_CASE("collocation estimates are converged in the node count") {
    for (double tau : {0.7, 1.1974658848701, 2.0}) {
        const auto coarse = rightmost_root_scalar(2.0, tau, 32);
        const auto fine = rightmost_root_scalar(2.0, tau, 64);
        CHECK(coarse.refined);
        CHECK(fine.refined);
        CHECK(std::abs(coarse.root - fine.root) <= 1e-8);
    }
    CHECK_THROWS_AS(rightmost_root_scalar(2.0, 1.0, 8), ValidationError);
}

TEST_CASE("figure1_sweep bands") {
    const std::vector<double> grid{1.5, 2.0, 5.0};
    const auto rows = figure1_sweep(grid);
    REQUIRE(rows.size() == grid.size());
    bool asymmetric = false;
    for (const auto& row : rows) {
        // the measurable band is symmetric about 1 by construction
        CHECK(std::abs((1.0 - row.red_tau_min) - (row.red_tau_max - 1.0)) <= 1e-12);
        // and sits strictly inside the constant-delay window
        CHECK(row.red_tau_min > row.blue_tau_min);
        CHECK(row.red_tau_max < row.blue_tau_max);
        asymmetric |=
            std::abs((1.0 - row.blue_tau_min) - (row.blue_tau_max - 1.0)) > 1e-6;
    }
    CHECK(asymmetric);

    // internal consistency of the p = 2 row
    const auto win = crossing_curve(2.0);
    CHECK(rows[1].blue_tau_min == doctest::Approx(win.tau_min).epsilon(1e-14));
    CHECK(rows[1].red_tau_max - 1.0 ==
          doctest::Approx(scalar_bound(2.0)).epsilon(1e-12));

    // concurrent evaluation returns identical rows in the same order
    const auto parallel = figure1_sweep(grid, 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(parallel[i].p == rows[i].p);
        CHECK(parallel[i].blue_tau_min == rows[i].blue_tau_min);
        CHECK(parallel[i].blue_tau_max == rows[i].blue_tau_max);
    }
}
