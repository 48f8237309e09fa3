#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "crossdiff/algebra.hpp"
#include "support.hpp"

using namespace crossdiff;

namespace {

InteractionMatrix k3(double k01, double k02, double k12) {
  Eigen::Matrix3d k;
  k << 0, k01, k02, k01, 0, k12, k02, k12, 0;
  return validate_hypotheses(Eigen::MatrixXd(k)).k;
}

InteractionMatrix k2(double k01) { return validate_hypotheses(std::vector<double>{0, k01, k01, 0}).k; }

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_SUITE("algebra") {
  TEST_CASE("diffusion matrix hand example") {
    const auto a = diffusion_matrix(k3(1, 2, 3), SimplexPoint::from(Eigen::Vector3d(0.2, 0.3, 0.5)));
    Eigen::Matrix3d expected;
    expected << 1.3, -0.2, -0.4, -0.3, 1.7, -0.9, -1.0, -1.5, 1.3;
    CHECK(rel(a, expected) < 1e-14);
  }

  TEST_CASE("diffusion matrix row of an absent species is diagonal") {
    const auto a = diffusion_matrix(k3(1, 2, 3), SimplexPoint::from(Eigen::Vector3d(0.0, 0.4, 0.6)));
    CHECK(a(0, 1) == 0.0);
    CHECK(a(0, 2) == 0.0);
    CHECK(a(0, 0) == doctest::Approx(1 * 0.4 + 2 * 0.6));
    const auto zero = validate_hypotheses(Eigen::MatrixXd::Zero(3, 3)).k;
    CHECK(diffusion_matrix(zero, SimplexPoint::from(Eigen::Vector3d(0.2, 0.3, 0.5))).isZero(0));
  }

  TEST_CASE("mobility hand example and vertices") {
    const auto m = mobility(k2(2), SimplexPoint::from(Eigen::Vector2d(0.25, 0.75)));
    Eigen::Matrix2d expected;
    expected << 0.375, -0.375, -0.375, 0.375;
    CHECK(rel(m, expected) < 1e-15);
    for (int v = 0; v < 3; ++v) {
      Eigen::Vector3d u = Eigen::Vector3d::Zero();
      u(v) = 1.0;
      CHECK(mobility(k3(1, 2, 3), SimplexPoint::from(u)).isZero(0));
    }
  }

  TEST_CASE("mobility identities on random states") {
    gen::Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
      const int s = gen::integer(rng, 2, 6);
      const auto k = gen::model(rng, s, 0.3);
      const auto u = gen::point(rng, s, 0.0);
      const auto m = mobility(k, u);
      CHECK(rel(m, m.transpose()) <= 1e-15);
      CHECK((m * Eigen::VectorXd::Ones(s)).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, m.cwiseAbs().maxCoeff()));
      CHECK(rel(m, diffusion_matrix(k, u) * u.values().asDiagonal()) < 1e-14);
    }
  }

  TEST_CASE("entropy Hessians") {
    const auto h = reduced_hessian(ReducedPoint::from(Eigen::Vector2d(0.2, 0.3)));
    CHECK(h(0, 0) == doctest::Approx(7.0));
    CHECK(h(0, 1) == doctest::Approx(2.0));
    CHECK(h(1, 0) == doctest::Approx(2.0));
    CHECK(h(1, 1) == doctest::Approx(5.3333333));
    const auto full = hessian_entropy(SimplexPoint::from(Eigen::Vector4d::Constant(0.25)));
    CHECK(rel(full, 4.0 * Eigen::Matrix4d::Identity()) < 1e-15);
    CHECK_THROWS_AS(hessian_entropy(SimplexPoint::from(Eigen::Vector2d(0.0, 1.0))), Error);
    CHECK_THROWS_AS(reduced_hessian(ReducedPoint::from(Eigen::Vector2d(0.5, 0.5))), Error);
    CHECK_THROWS_AS(reduced_hessian(ReducedPoint::from(Eigen::Vector2d(0.0, 0.5))), Error);
  }

  TEST_CASE("reduced diffusion") {
    gen::Rng rng(3);
    SUBCASE("two species reduce to a constant") {
      for (double u : {0.0, 0.1, 0.5, 0.93, 1.0}) {
        const auto a = reduced_diffusion(k2(1.7), ReducedPoint::from(Eigen::VectorXd::Constant(1, u)));
        CHECK(a(0, 0) == doctest::Approx(1.7).epsilon(1e-15));
      }
    }
    SUBCASE("zero model") {
      const auto zero = validate_hypotheses(Eigen::MatrixXd::Zero(3, 3)).k;
      CHECK(reduced_diffusion(zero, ReducedPoint::from(Eigen::Vector2d(0.2, 0.3))).isZero(0));
    }
    SUBCASE("equals reduced mobility times reduced Hessian") {
      for (int trial = 0; trial < 200; ++trial) {
        const int s = gen::integer(rng, 2, 6);
        const auto k = gen::model(rng, s, 0.3);
        const auto r = project(gen::point(rng, s));
        CHECK(rel(reduced_diffusion(k, r), reduced_mobility(k, r) * reduced_hessian(r)) < 1e-12);
      }
    }
  }

  TEST_CASE("reduced mobility") {
    const auto m = reduced_mobility(k2(2), ReducedPoint::from(Eigen::VectorXd::Constant(1, 0.25)));
    CHECK(m(0, 0) == doctest::Approx(0.375));
    const auto vertex = reduced_mobility(k3(1, 2, 3), ReducedPoint::from(Eigen::Vector2d(0.0, 0.0)));
    CHECK(vertex.isZero(0));
    gen::Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
      const int s = gen::integer(rng, 2, 6);
      const auto k = gen::model(rng, s, 0.0);
      // floor keeps every density (including the vacancy) above 0.05
      Eigen::VectorXd u = gen::simplex(rng, s, 0.0);
      u = (0.05 * Eigen::VectorXd::Ones(s) + (1.0 - 0.05 * s) * u).eval();
      const auto r = project(SimplexPoint::from(u));
      const auto m_hat = reduced_mobility(k, r);
      CHECK(rel(m_hat, m_hat.transpose()) <= 1e-15);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m_hat);
      CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
  }

  TEST_CASE("lift and project") {
    const auto u = lift(ReducedPoint::from(Eigen::Vector2d(0.2, 0.3)));
    CHECK(u[0] == doctest::Approx(0.5));
    CHECK(u[1] == 0.2);
    CHECK(u[2] == 0.3);
    const auto origin = lift(ReducedPoint::from(Eigen::Vector3d::Zero()));
    CHECK(origin[0] == 1.0);
    gen::Rng rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto p = gen::point(rng, gen::integer(rng, 2, 6), 0.0);
      CHECK((lift(project(p)).values() - p.values()).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }

  TEST_CASE("dissipation form hand example saturates the full-interaction bound") {
    const auto k = k2(2);
    const auto u = SimplexPoint::from(Eigen::Vector2d(0.25, 0.75));
    const auto xi = TangentVector::from(Eigen::Vector2d(1, -1));
    CHECK(dissipation_form_sum(k, u, xi) == doctest::Approx(10.6666667));
    CHECK(dissipation_form_matrix(k, u, xi) == doctest::Approx(10.6666667));
    const auto b = coercivity_bounds(k, u, xi);
    CHECK(b.lhs == doctest::Approx(10.6666667));
    CHECK(b.bound_ff == doctest::Approx(10.6666667));
    CHECK(b.lhs >= b.bound_pd - 1e-12);
    const auto zero = TangentVector::from(Eigen::Vector2d::Zero());
    CHECK(dissipation_form_sum(k, u, zero) == 0.0);
    const auto zb = coercivity_bounds(k, u, zero);
    CHECK(zb.lhs == 0.0);
    CHECK(zb.bound_pd == 0.0);
    CHECK(zb.bound_ff == 0.0);
  }

  TEST_CASE("sum form tolerates boundary states") {
    const auto k = k3(1, 0, 2);
    const auto u = SimplexPoint::from(Eigen::Vector3d(0.0, 0.4, 0.6));
    const auto xi = TangentVector::from(Eigen::Vector3d(0.0, 0.3, -0.3));
    CHECK(std::isfinite(dissipation_form_sum(k, u, xi)));
    CHECK_THROWS_AS(dissipation_form_matrix(k, u, xi), Error);
  }

  TEST_CASE("tangent vectors") {
    CHECK_THROWS_AS(TangentVector::from(Eigen::Vector2d(1, 0)), Error);
    const auto lifted = TangentVector::lift(Eigen::Vector2d(0.2, 0.5));
    CHECK(lifted.values()(0) == doctest::Approx(-0.7));
  }

  TEST_CASE("reduced and full quadratic forms agree") {
    gen::Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
      const int s = gen::integer(rng, 2, 6);
      const auto k = gen::model(rng, s, 0.3);
      const auto r = project(gen::point(rng, s));
      Eigen::VectorXd zeta(s - 1);
      for (int i = 0; i < s - 1; ++i) zeta(i) = gen::normal(rng);
      const auto xi = TangentVector::lift(zeta);
      const double reduced = zeta.dot(reduced_dissipation_matrix(k, r) * zeta);
      const double full = dissipation_form_matrix(k, lift(r), xi);
      CHECK(std::abs(reduced - full) <= 1e-12 * std::max(1.0, std::abs(full)));
      const auto rc = reduced_coercivity(k, r, zeta);
      CHECK(rc.lhs >= rc.bound - 1e-12 * std::max(1.0, std::abs(rc.lhs)));
    }
  }

  TEST_CASE("dual variables") {
    const auto third = dual_to_primal(Eigen::Vector2d(0, 0));
    CHECK(third[0] == doctest::Approx(1.0 / 3));
    CHECK(third[1] == doctest::Approx(1.0 / 3));
    CHECK(third.vacancy() == doctest::Approx(1.0 / 3));
    const auto half = dual_to_primal(Eigen::Vector2d(std::log(2.0), 0));
    CHECK(half[0] == doctest::Approx(0.5));
    CHECK(half[1] == doctest::Approx(0.25));
    CHECK(half.vacancy() == doctest::Approx(0.25));

    double previous = 0.0;
    for (double w = -40; w <= 700; w += 20) {
      const auto p = dual_to_primal(Eigen::Vector2d(w, 0.0));
      CHECK(p[0] >= previous);
      CHECK(p[0] <= 1.0);
      CHECK(std::isfinite(p.vacancy()));
      previous = p[0];
    }
    CHECK(previous == doctest::Approx(1.0));

    gen::Rng rng(9);
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = gen::integer(rng, 1, 6);
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w(i) = gen::uniform(rng, -30, 30);
      const auto back = primal_to_dual(dual_to_primal(w));
      CHECK((back - w).cwiseAbs().maxCoeff() <= 1e-10);
    }
    CHECK_THROWS_AS(primal_to_dual(ReducedPoint::from(Eigen::Vector2d(0.0, 0.5))), Error);
  }

  TEST_CASE("dual Jacobian matches finite differences") {
    gen::Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = gen::integer(rng, 1, 4);
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w(i) = gen::uniform(rng, -3, 3);
      const auto jac = dual_jacobian(lift(dual_to_primal(w)));
      for (int a = 0; a < n; ++a) {
        Eigen::VectorXd wp = w, wm = w;
        wp(a) += 1e-6;
        wm(a) -= 1e-6;
        const Eigen::VectorXd col =
            (lift(dual_to_primal(wp)).values() - lift(dual_to_primal(wm)).values()) / 2e-6;
        CHECK((jac.col(a) - col).cwiseAbs().maxCoeff() < 1e-8);
      }
    }
  }

  TEST_CASE("log mean") {
    CHECK(log_mean(2.0, 2.0) == 2.0);
    CHECK(log_mean(1.0, std::exp(1.0)) == doctest::Approx(std::exp(1.0) - 1.0));
    CHECK(log_mean(0.0, 1.0) == 0.0);
    CHECK(log_mean(1.0 + 1e-12, 1.0) == doctest::Approx(1.0));
    CHECK(log_mean(3.0, 5.0) == doctest::Approx(log_mean(5.0, 3.0)).epsilon(1e-15));
  }

  TEST_CASE("face mobility reproduces the primal face flux") {
    gen::Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
      const int s = gen::integer(rng, 2, 6);
      const auto k = gen::model(rng, s, 0.3);
      const Eigen::VectorXd left = gen::simplex(rng, s), right = gen::simplex(rng, s);
      const auto mf = face_mobility(k, left, right);
      const Eigen::VectorXd dw = primal_to_dual(project(SimplexPoint::from(right))) -
                                 primal_to_dual(project(SimplexPoint::from(left)));
      Eigen::VectorXd flux(s - 1);
      for (int i = 1; i < s; ++i) {
        double f = 0.0;
        for (int j = 0; j < s; ++j) f += k(i, j) * (left(j) * right(i) - left(i) * right(j));
        flux(i - 1) = f;
      }
      CHECK((mf * dw - flux).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, flux.cwiseAbs().maxCoeff()));
      CHECK(rel(mf, mf.transpose()) <= 1e-15);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mf);
      CHECK(eig.eigenvalues().minCoeff() >= -1e-13 * std::max(1.0, mf.cwiseAbs().maxCoeff()));
    }
  }

  TEST_CASE("face mobility for two species is linear diffusion") {
    const Eigen::Vector2d left(0.7, 0.3), right(0.45, 0.55);
    const auto mf = face_mobility(k2(1.5), left, right);
    const double dw = std::log(0.55 / 0.45) - std::log(0.3 / 0.7);
    CHECK(mf(0, 0) * dw == doctest::Approx(1.5 * (0.55 - 0.3)).epsilon(1e-14));
  }
}
