#include <doctest.h>

#include "pptsym/errors.hpp"
#include "pptsym/horodecki.hpp"
#include "support.hpp"

using namespace pptsym;
using namespace testsupport;

namespace {

CVec ket(int d, int a, int i) {
    CVec v = CVec::Zero(2 * d);
    v(a * d + i) = 1.0;
    return v;
}

// The 2 x 4 bound entangled family in its textbook matrix form.
CMat textbook_2x4(double b) {
    const double s = std::sqrt(1 - b * b) / 2;
    CMat m = CMat::Zero(8, 8);
    for (int i = 0; i < 3; ++i) {
        m(i, i) = b;
        m(5 + i, 5 + i) = b;
        m(i, 5 + i) = b;
        m(5 + i, i) = b;
    }
    m(3, 3) = b;
    m(4, 4) = (1 + b) / 2;
    m(7, 7) = (1 + b) / 2;
    m(4, 7) = s;
    m(7, 4) = s;
    return m / (7 * b + 1);
}

std::vector<double> spectrum(const CMat& m) {
    Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return v;
}

double principal_angle_sin(const CMat& a, const CMat& b) {
    // a, b with orthonormal columns spanning subspaces of equal dimension
    CMat pb = b * b.adjoint();
    return (a - pb * a).norm();
}

}  // namespace

TEST_CASE("rho_insep examples") {
    auto r2 = rho_insep(2);
    CVec psi0 = (ket(2, 0, 0) + ket(2, 1, 1)) / std::sqrt(2.0);
    CVec k10 = ket(2, 1, 0);
    CMat expect = (2.0 / 3.0) * psi0 * psi0.adjoint() + (1.0 / 3.0) * k10 * k10.adjoint();
    CHECK((r2.matrix - expect).norm() < 1e-15);
    for (int d = 2; d <= 8; ++d) CHECK(std::abs(rho_insep(d).matrix.trace().real() - 1.0) < 1e-14);
    CHECK(numeric_rank(rho_insep(5).matrix) == 5);
    CHECK_THROWS_AS(rho_insep(1), PreconditionError);
}

TEST_CASE("rho_db at b = 0 is the pure state Phi_0") {
    for (int d = 2; d <= 6; ++d) {
        CVec phi = (ket(d, 0, 0) + ket(d, 0, d - 1)) / std::sqrt(2.0);
        CMat expect = phi * phi.adjoint();
        CHECK((rho_db({d, 0.0}).matrix - expect).norm() < 1e-15);
    }
}

TEST_CASE("rho_db matches its block assembly") {
    for (int d = 2; d <= 8; ++d)
        for (double b : {0.0, 0.2, 0.5, 0.9, 1.0}) CHECK((rho_db({d, b}).matrix - rho_db_blocks({d, b})).norm() < 1e-14);
}

TEST_CASE("d = 4 reproduces the textbook 2 x 4 family up to local relabeling") {
    for (double b : {0.1, 0.5, 0.8}) {
        CMat ours = rho_db({4, b}).matrix;
        CMat ref = textbook_2x4(b);
        auto s1 = spectrum(ours), s2 = spectrum(ref);
        auto t1 = spectrum(qubit_partial_transpose(ours, 4)), t2 = spectrum(qubit_partial_transpose(ref, 4));
        for (size_t i = 0; i < s1.size(); ++i) {
            CHECK(std::abs(s1[i] - s2[i]) < 1e-14);
            CHECK(std::abs(t1[i] - t2[i]) < 1e-14);
        }
    }
}

TEST_CASE("PPT by the anti-diagonal unitary") {
    CHECK(verify_ppt_by_unitary({4, 0.3}) <= 1e-13);
    CHECK(verify_ppt_by_unitary({2, 1.0}) <= 1e-13);
    CHECK(verify_ppt_by_unitary({7, 0.9}) <= 1e-13);
    CHECK(min_eig(qubit_partial_transpose(rho_db({7, 0.9}).matrix, 7)) >= -1e-12);
}

TEST_CASE("qubit partial transpose agrees with explicit index swap") {
    std::mt19937_64 rng(3);
    for (int d = 2; d <= 5; ++d) {
        CMat m = random_complex(2 * d, 2 * d, rng);
        CMat pt = qubit_partial_transpose(m, d);
        for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c)
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) CHECK(pt(a * d + i, c * d + j) == m(c * d + i, a * d + j));
    }
}

TEST_CASE("range criterion examples") {
    CHECK(range_criterion_test({4, 0.5}).entangled);
    auto r3 = range_criterion_test({3, 0.5});
    CHECK_FALSE(r3.entangled);
    CHECK(r3.witness.has_value());
    CHECK(range_criterion_test({6, 0.25}).entangled);
    CHECK_THROWS_AS(range_criterion_test({4, 0.0}), BoundaryError);
    CHECK_THROWS_AS(range_criterion_test({4, 1.0}), BoundaryError);
}

TEST_CASE("range criterion witness lies in both ranges") {
    Tolerances tol;
    for (int d : {2, 3})
        for (double b : {0.25, 0.5, 0.75}) {
            HorodeckiParams p{d, b};
            auto rep = range_criterion_test(p);
            REQUIRE(rep.witness.has_value());
            CMat rho = rho_db(p).matrix;
            auto prof = rank_profile(rho, tol);
            auto prof_t = rank_profile(qubit_partial_transpose(rho, d), tol);
            CHECK(range_residual(prof, range_product_vector(p, *rep.witness, false)) <= 1e-8);
            CHECK(range_residual(prof_t, range_product_vector(p, *rep.witness, true)) <= 1e-8);
        }
}

TEST_CASE("range criterion across a 20-point b grid") {
    for (int d = 2; d <= 6; ++d)
        for (int i = 1; i <= 20; ++i) {
            double b = i / 21.0;
            CHECK(range_criterion_test({d, b}).entangled == (d >= 4));
        }
}

TEST_CASE("kernel basis") {
    HorodeckiParams p{5, 0.5};
    auto k = kernel_basis(p);
    CHECK(k.size() == 4);
    CMat rho = rho_db(p).matrix;
    for (const auto& v : k) CHECK((rho * v).norm() <= 1e-12 * v.norm());
    CHECK(rank_profile(rho, Tolerances{}).rank == 6);

    HorodeckiParams q{4, 0.9};
    auto kq = kernel_basis(q);
    CMat kb(8, kq.size());
    for (size_t i = 0; i < kq.size(); ++i) kb.col(i) = kq[i];
    CMat orth = kb.householderQr().householderQ() * CMat::Identity(8, kq.size());
    auto prof = rank_profile(rho_db(q).matrix, Tolerances{});
    REQUIRE(prof.kernel_dim() == static_cast<int>(kq.size()));
    CHECK(principal_angle_sin(orth, prof.kernel_basis) <= 1e-8);
    CHECK_THROWS_AS(kernel_basis({4, 1.0}), BoundaryError);
}

TEST_CASE("b = 1 product mixture") {
    auto m4 = separable_decomposition_b1(4, 9);
    CHECK(m4.frobenius_error <= 1e-10);
    auto m2 = separable_decomposition_b1(2, 5);
    CHECK(m2.frobenius_error <= 1e-12);
    CHECK((m2.reconstruct() - rho_db({2, 1.0}).matrix).norm() <= 1e-12);
    double wsum = 0;
    for (const auto& t : m4.terms) {
        wsum += t.weight;
        CHECK(t.weight >= 0);
        CHECK(std::abs(t.qubit.norm() - 1) < 1e-14);
        CHECK(std::abs(t.qudit.norm() - 1) < 1e-14);
    }
    CHECK(std::abs(wsum - 1.0) < 1e-12);
    CHECK(m4.fitted_prefactor > 0);
    CHECK_THROWS_AS(separable_decomposition_b1(4, 8), PreconditionError);
}

TEST_CASE("family sweep: PSD, trace one, PPT, ranks") {
    Tolerances tol;
    for (int d = 2; d <= 8; ++d)
        for (int i = 0; i <= 10; ++i) {
            double b = i / 10.0;
            CMat rho = rho_db({d, b}).matrix;
            CMat pt = qubit_partial_transpose(rho, d);
            CHECK(min_eig(rho) >= -1e-10);
            CHECK(min_eig(pt) >= -1e-10);
            CHECK(std::abs(rho.trace().real() - 1.0) <= 1e-12);
            if (i > 0 && i < 10) {
                CHECK(rank_profile(rho, tol).rank == d + 1);
                CHECK(rank_profile(pt, tol).rank == d + 1);
            }
        }
}

TEST_CASE("classification of the family") {
    CHECK(classify_horodecki({4, 0.0}).verdict == HorodeckiVerdict::Separable);
    CHECK(classify_horodecki({4, 1.0}).verdict == HorodeckiVerdict::Separable);
    CHECK(classify_horodecki({5, 0.5}).verdict == HorodeckiVerdict::Entangled);
    CHECK(classify_horodecki({3, 0.5}).verdict == HorodeckiVerdict::Separable);
    CHECK_THROWS_AS(HorodeckiParams({1, 0.5}).validate(), PreconditionError);
    CHECK_THROWS_AS(HorodeckiParams({4, 1.5}).validate(), PreconditionError);
}
