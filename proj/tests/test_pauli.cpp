#include "hyperham/pauli.hpp"

#include "hyperham/quaternion_core.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hyperham;
using hyperham::testing::random_vector;
using hyperham::testing::uniform;

namespace {

// The 4x4 real matrix of the spin equation written out entry by entry.
Matrix4 literal_generator(const Vector3& b) {
  const double bx = b[0], by = b[1], bz = b[2];
  Matrix4 a;
  a << 0, -bz, by, -bx,
       bz, 0, bx, by,
       -by, -bx, 0, bz,
       bx, -by, -bz, 0;
  return a;
}

Spinor random_spinor(std::mt19937_64& rng) {
  const Vector4 v = random_vector(rng, 4);
  return Spinor::normalized({v[0], v[1]}, {v[2], v[3]});
}

Vector3 random_field(std::mt19937_64& rng) { return random_vector(rng, 3); }

}  // namespace

TEST_CASE("generator") {
  CHECK(pauli_generator(Vector3::Zero()) == Matrix4::Zero());
  Matrix4 z;
  z << 0, -1, 0, 0,
       1, 0, 0, 0,
       0, 0, 0, 1,
       0, 0, -1, 0;
  CHECK(pauli_generator(Vector3(0, 0, 1)) == z);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const Vector3 b = random_field(rng);
    const Matrix4 a = pauli_generator(b);
    CHECK(max_abs(a - literal_generator(b)) <= 1e-15);
    CHECK(max_abs(a + a.transpose()) == 0.0);
    // Complex oracle: i M acting on (psi+, psi-) equals A acting on xi.
    const Spinor psi = random_spinor(rng);
    const Eigen::Vector2cd out = Complex(0, 1) * pauli_operator(b) * psi.as_vector();
    CHECK((spinor_to_r4({out[0], out[1]}) - a * spinor_to_r4(psi)).norm() <= 1e-14);
  }
  // A^2 = -|B|^2 I.
  const Vector3 b(0.3, -1.2, 0.7);
  CHECK(max_abs(pauli_generator(b) * pauli_generator(b) + b.squaredNorm() * Matrix4::Identity()) <= 1e-14);
}

TEST_CASE("hyperhamiltonian form") {
  SUBCASE("hamiltonian values") {
    const HamiltonianTriple h = pauli_hamiltonians(Vector3(0, 0, 1));
    const Vector xi = Vector4(0.5, 0.5, 0.5, 0.5);
    CHECK(h.value(0, xi) == 0.0);
    CHECK(h.value(1, xi) == 0.0);
    CHECK(h.value(2, xi) == 0.5);
    for (int a = 0; a < 3; ++a) CHECK(pauli_hamiltonians(Vector3::Zero()).value(a, xi) == 0.0);
    const HamiltonianTriple g = pauli_hamiltonians(Vector3(1, 2, 3));
    CHECK(g.value(0, xi) == doctest::Approx(1.0));  // B_y |xi|^2 / 2
    CHECK(g.value(1, xi) == doctest::Approx(0.5));  // B_x |xi|^2 / 2
    CHECK((g.gradient(2, xi) - 3.0 * xi).norm() <= 1e-15);
  }
  SUBCASE("field equivalence") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
      const Vector3 b = random_field(rng);
      const Vector xi = random_vector(rng, 4);
      const Vector x = hyperham_field_at(pauli_system(b), xi);
      CHECK((x - pauli_generator(b) * xi).norm() <= 1e-13);
    }
  }
  SUBCASE("chart is hyperkahler") {
    const StructureReport r = verify_structure_at(pauli_chart(), Vector4(0.1, 0.2, 0.3, 0.4), 1e-12);
    CHECK(r.passed);
  }
}

TEST_CASE("spinor mapping") {
  CHECK(spinor_to_r4({{1, 0}, {0, 0}}) == Vector4(1, 0, 0, 0));
  CHECK(spinor_to_r4({{0, 1}, {0, 0}}) == Vector4(0, 1, 0, 0));
  CHECK(spinor_to_r4({{0, 0}, {2, -3}}) == Vector4(0, 0, 2, -3));
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    const Vector4 v = random_vector(rng, 4);
    const Spinor psi{{v[0], v[1]}, {v[2], v[3]}};
    CHECK(spinor_to_r4(psi).squaredNorm() == doctest::Approx(psi.norm_squared()).epsilon(1e-15));
    const Spinor back = r4_to_spinor(spinor_to_r4(psi));
    CHECK(back.up == psi.up);
    CHECK(back.down == psi.down);
  }
  CHECK(Spinor::normalized({3, 0}, {0, 4}).norm_squared() == doctest::Approx(1.0));
  CHECK_THROWS_AS(Spinor::normalized({0, 0}, {0, 0}), DomainError);
}

TEST_CASE("bloch vector") {
  CHECK(bloch_vector(Spinor{{1, 0}, {0, 0}}) == Vector3(0, 0, 1));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK((bloch_vector(Spinor{{s, 0}, {s, 0}}) - Vector3(1, 0, 0)).norm() <= 1e-15);
  CHECK((bloch_vector(Spinor{{s, 0}, {0, s}}) - Vector3(0, 1, 0)).norm() <= 1e-15);
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const Vector4 v = random_vector(rng, 4);
    const Spinor psi{{v[0], v[1]}, {v[2], v[3]}};
    // Direct expectation values with the Pauli matrices.
    const Eigen::Vector2cd p = psi.as_vector();
    Matrix2c sx, sy, sz;
    sx << 0, 1, 1, 0;
    sy << 0, Complex(0, -1), Complex(0, 1), 0;
    sz << 1, 0, 0, -1;
    const Vector3 expected((p.adjoint() * sx * p)(0).real(), (p.adjoint() * sy * p)(0).real(),
                           (p.adjoint() * sz * p)(0).real());
    CHECK((bloch_vector(psi) - expected).norm() <= 1e-14);
    CHECK((bloch_vector(Vector4(v)) - expected).norm() <= 1e-14);
    CHECK(bloch_vector(psi).norm() == doctest::Approx(psi.norm_squared()).epsilon(1e-14));
  }
}

TEST_CASE("magnetic field") {
  const MagneticField c = MagneticField::constant(Vector3(1, 2, 3));
  CHECK(c(7.0) == Vector3(1, 2, 3));
  CHECK(c.is_constant());
  const MagneticField r = MagneticField::rotating(0.5, 2.0, 1.0);
  CHECK((r(0.3) - Vector3(0.5 * std::cos(0.6), 0.5 * std::sin(0.6), 1.0)).norm() <= 1e-16);
  CHECK_FALSE(r.is_constant());
  const MagneticField t = MagneticField::tabulated({0.0, 1.0, 3.0}, {Vector3(0, 0, 1), Vector3(2, 0, 1), Vector3(2, 4, 1)});
  CHECK((t(0.5) - Vector3(1, 0, 1)).norm() <= 1e-15);
  CHECK((t(2.0) - Vector3(2, 2, 1)).norm() <= 1e-15);
  CHECK(t(-1.0) == Vector3(0, 0, 1));
  CHECK(t(10.0) == Vector3(2, 4, 1));
  CHECK(t.covers(0.0, 3.0));
  CHECK_FALSE(t.covers(0.0, 3.5));
  CHECK_THROWS_AS(MagneticField::tabulated({0.0, 0.0}, {Vector3::Zero(), Vector3::Zero()}), DomainError);
  CHECK_THROWS_AS(MagneticField::tabulated({0.0, 1.0}, {Vector3::Zero()}), DimensionError);
  CHECK_THROWS_AS(MagneticField::constant(Vector3(NAN, 0, 0)), DomainError);
  CHECK_THROWS_AS(MagneticField::rotating(1e308, 1.0, 1e308 * 10), DomainError);
}

TEST_CASE("spinor evolution") {
  const MagneticField bz = MagneticField::constant(Vector3(0, 0, 1));
  SUBCASE("c2 against the scalar solution") {
    for (PauliMethod m : {PauliMethod::rk4, PauliMethod::exact}) {
      const SpinorTrajectory tr = evolve_pauli_c2(bz, {{1, 0}, {0, 0}}, 0.0, 10.0, 1e-3, m);
      double worst = 0.0;
      for (std::size_t i = 0; i < tr.times.size(); ++i) {
        worst = std::max(worst, std::abs(tr.states[i].up - std::exp(Complex(0, tr.times[i]))));
        worst = std::max(worst, std::abs(tr.states[i].down));
      }
      CHECK(worst <= (m == PauliMethod::exact ? 1e-13 : 1e-9));
    }
  }
  SUBCASE("r4 against (cos t, sin t, 0, 0)") {
    for (PauliMethod m : {PauliMethod::rk4, PauliMethod::exact}) {
      const Trajectory tr = evolve_pauli_r4(bz, Vector4::UnitX(), 0.0, 10.0, 1e-3, m);
      double worst = 0.0;
      for (std::size_t i = 0; i < tr.size(); ++i) {
        const double t = tr.times[i];
        worst = std::max(worst, (tr.states[i] - Vector(Vector4(std::cos(t), std::sin(t), 0, 0))).norm());
      }
      CHECK(worst <= (m == PauliMethod::exact ? 1e-13 : 1e-9));
      CHECK(tr.state_names == pauli_state_names());
    }
  }
  SUBCASE("zero field") {
    const Spinor psi{{0.6, 0}, {0, 0.8}};
    const SpinorTrajectory tr = evolve_pauli_c2(MagneticField::constant(Vector3::Zero()), psi, 0.0, 1.0, 0.1);
    CHECK(tr.states.back().up == psi.up);
    CHECK(tr.states.back().down == psi.down);
  }
  SUBCASE("exact needs a constant field") {
    const MagneticField r = MagneticField::rotating(1.0, 1.0, 0.0);
    CHECK_THROWS_AS(evolve_pauli_c2(r, {{1, 0}, {0, 0}}, 0.0, 1.0, 0.1, PauliMethod::exact), DomainError);
    CHECK_THROWS_AS(evolve_pauli_r4(r, Vector4::UnitX(), 0.0, 1.0, 0.1, PauliMethod::exact), DomainError);
  }
  SUBCASE("method names") {
    CHECK(parse_pauli_method("rk4") == PauliMethod::rk4);
    CHECK(parse_pauli_method("exact") == PauliMethod::exact);
    CHECK(to_string(PauliMethod::exact) == "exact");
    CHECK_THROWS_AS(parse_pauli_method("euler"), DomainError);
  }
}

TEST_CASE("representation equivalence") {
  std::mt19937_64 rng(77);
  SUBCASE("closed forms, random constant fields") {
    for (int i = 0; i < 50; ++i) {
      const MagneticField f = MagneticField::constant(random_field(rng));
      const Spinor psi = random_spinor(rng);
      const Trajectory c2 = evolve_pauli_c2(f, psi, 0.0, 10.0, 1e-2, PauliMethod::exact).to_r4();
      const Trajectory r4 = evolve_pauli_r4(f, spinor_to_r4(psi), 0.0, 10.0, 1e-2, PauliMethod::exact);
      REQUIRE(c2.size() == r4.size());
      double worst = 0.0;
      for (std::size_t k = 0; k < c2.size(); ++k) worst = std::max(worst, (c2.states[k] - r4.states[k]).norm());
      CHECK(worst <= 1e-11);
    }
  }
  SUBCASE("rk4, random constant fields") {
    for (int i = 0; i < 5; ++i) {
      const MagneticField f = MagneticField::constant(random_field(rng));
      const Spinor psi = random_spinor(rng);
      const Trajectory c2 = evolve_pauli_c2(f, psi, 0.0, 10.0, 1e-3).to_r4();
      const Trajectory r4 = evolve_pauli_r4(f, spinor_to_r4(psi), 0.0, 10.0, 1e-3);
      double worst = 0.0;
      for (std::size_t k = 0; k < c2.size(); ++k) worst = std::max(worst, (c2.states[k] - r4.states[k]).norm());
      CHECK(worst <= 1e-9);
    }
  }
  SUBCASE("rk4, rotating field") {
    const MagneticField f = MagneticField::rotating(0.8, 1.7, 0.4);
    const Spinor psi = random_spinor(rng);
    const Trajectory c2 = evolve_pauli_c2(f, psi, 0.0, 10.0, 1e-3).to_r4();
    const Trajectory r4 = evolve_pauli_r4(f, spinor_to_r4(psi), 0.0, 10.0, 1e-3);
    double worst = 0.0, drift = 0.0;
    for (std::size_t k = 0; k < c2.size(); ++k) {
      worst = std::max(worst, (c2.states[k] - r4.states[k]).norm());
      drift = std::max(drift, std::abs(r4.states[k].norm() - 1.0));
    }
    CHECK(worst <= 1e-9);
    CHECK(drift <= 1e-8);
  }
}

TEST_CASE("norm conservation") {
  const MagneticField f = MagneticField::constant(Vector3(0.4, -0.9, 0.6));
  const Vector4 xi0 = spinor_to_r4(Spinor::normalized({0.3, 0.2}, {-0.5, 0.7}));
  const Trajectory rk = evolve_pauli_r4(f, xi0, 0.0, 10.0, 1e-3);
  const Trajectory ex = evolve_pauli_r4(f, xi0, 0.0, 10.0, 1e-3, PauliMethod::exact);
  double drift_rk = 0.0, drift_ex = 0.0;
  for (std::size_t k = 0; k < rk.size(); ++k) {
    drift_rk = std::max(drift_rk, std::abs(rk.states[k].squaredNorm() - 1.0));
    drift_ex = std::max(drift_ex, std::abs(ex.states[k].squaredNorm() - 1.0));
  }
  CHECK(drift_rk <= 1e-9);
  CHECK(drift_ex <= 1e-13);
}

TEST_CASE("larmor precession") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 5; ++i) {
    const Vector3 b = random_field(rng);
    const Spinor psi = random_spinor(rng);
    const Trajectory tr = evolve_pauli_r4(MagneticField::constant(b), spinor_to_r4(psi), 0.0, 10.0, 1e-3);
    std::vector<Vector3> bloch;
    for (const Vector& x : tr.states) bloch.push_back(bloch_vector(Vector4(x)));
    const Vector3 axis = b.normalized();
    double along = 0.0;
    for (const Vector3& n : bloch) along = std::max(along, std::abs(n.dot(axis) - bloch.front().dot(axis)));
    CHECK(along <= 1e-9);
    const double rate = measure_precession_rate(tr.times, bloch, axis);
    CHECK(std::abs(std::abs(rate) - 2 * b.norm()) <= 1e-6 * 2 * b.norm());
  }
  SUBCASE("zero crossings about z") {
    const double s = 1.0 / std::sqrt(2.0);
    const SpinorTrajectory tr =
        evolve_pauli_c2(MagneticField::constant(Vector3(0, 0, 1)), {{s, 0}, {s, 0}}, 0.0, 10.0, 1e-3, PauliMethod::exact);
    // n_x = cos(2t): crossings are pi/2 apart.
    std::vector<double> crossings;
    for (std::size_t k = 1; k < tr.times.size(); ++k) {
      const double a = bloch_vector(tr.states[k - 1])[0], c = bloch_vector(tr.states[k])[0];
      if (a * c < 0) crossings.push_back(tr.times[k - 1] + (tr.times[k] - tr.times[k - 1]) * a / (a - c));
    }
    REQUIRE(crossings.size() >= 4);
    const double spacing = (crossings.back() - crossings.front()) / double(crossings.size() - 1);
    CHECK(spacing == doctest::Approx(std::numbers::pi / 2).epsilon(1e-6));
  }
}

TEST_CASE("bloch columns") {
  Trajectory tr = evolve_pauli_r4(MagneticField::constant(Vector3(1, 0, 0)), Vector4::UnitX(), 0.0, 1.0, 0.1);
  add_bloch_columns(tr);
  CHECK(tr.diagnostic_names == std::vector<std::string>{"n_x", "n_y", "n_z"});
  CHECK(tr.diagnostics[2][0] == 1.0);
}

TEST_CASE("tabulated field evolution stays unitary") {
  const MagneticField f = MagneticField::tabulated({0.0, 2.0, 5.0}, {Vector3(0, 0, 1), Vector3(1, 0, 0), Vector3(0, 1, 1)});
  const Trajectory tr = evolve_pauli_r4(f, Vector4::UnitX(), 0.0, 5.0, 1e-3);
  double drift = 0.0;
  for (const Vector& x : tr.states) drift = std::max(drift, std::abs(x.norm() - 1.0));
  CHECK(drift <= 1e-8);
  const Trajectory c2 = evolve_pauli_c2(f, {{1, 0}, {0, 0}}, 0.0, 5.0, 1e-3).to_r4();
  CHECK((c2.states.back() - tr.states.back()).norm() <= 1e-9);
}
