#include <doctest.h>

#include "pptsym/errors.hpp"
#include "pptsym/hilbert.hpp"
#include "pptsym/horodecki.hpp"
#include "support.hpp"

#include <cstdlib>

using namespace pptsym;
using namespace testsupport;

namespace {

// Random Hermitian operator supported on S_N with the given rank.
CMat random_symmetric_supported(int n, int rank, std::mt19937_64& rng) {
    CMat v = brute_dicke_isometry(n) * random_complex(n + 1, rank, rng);
    return v * v.adjoint();
}

std::vector<double> sorted_nonzero_eigs(const CMat& m, double cut) {
    Eigen::SelfAdjointEigenSolver<CMat> es((m + m.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i)) > cut) out.push_back(es.eigenvalues()(i));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("dicke basis small cases") {
    auto b1 = dicke_basis(1);
    CHECK(b1.vectors(0, 0) == 1.0);
    CHECK(b1.vectors(1, 0) == 0.0);
    CHECK(b1.vectors(0, 1) == 0.0);
    CHECK(b1.vectors(1, 1) == 1.0);

    auto b2 = dicke_basis(2);
    RVec e1 = b2.vectors.col(1);
    CHECK(e1(0) == 0.0);
    CHECK(e1(1) == 1.0);
    CHECK(e1(2) == 1.0);
    CHECK(e1(3) == 0.0);
    CHECK(b2.norms[1] == 2.0);

    CHECK(dicke_basis(4).norms[2] == 6.0);
}

TEST_CASE("dicke basis matches bit-string enumeration and integer Gram matrix") {
    for (int n = 1; n <= 8; ++n) {
        auto b = dicke_basis(n);
        REQUIRE(b.vectors.cols() == n + 1);
        for (int i = 0; i <= n; ++i) {
            CHECK((b.vectors.col(i).cast<cplx>() - brute_dicke(n, i)).norm() == 0.0);
            for (int j = 0; j <= n; ++j) {
                double g = b.vectors.col(i).dot(b.vectors.col(j));
                CHECK(g == (i == j ? binomial(n, i) : 0.0));
            }
        }
    }
}

TEST_CASE("dicke basis size bounds") {
    CHECK_THROWS_AS(dicke_basis(0), SizeError);
    CHECK_THROWS_AS(dicke_basis(13), SizeError);
    CHECK_NOTHROW(dicke_basis(12));
}

TEST_CASE("symmetric projector examples") {
    CMat swap = permutation_operator({1, 0});
    CMat p2 = symmetric_projector(2);
    CHECK((p2 - (CMat::Identity(4, 4) + swap) / 2.0).norm() < 1e-15);
    CHECK(std::abs(symmetric_projector(4).trace() - cplx(5.0)) < 1e-14);
}

TEST_CASE("symmetric projector equals the permutation average") {
    for (int n = 1; n <= 5; ++n) {
        CMat p = symmetric_projector(n);
        CHECK((p - brute_symmetrizer(n)).norm() < 1e-13);
        CHECK((p * p - p).norm() < 1e-14);
        CHECK((p.transpose() - p).norm() < 1e-15);
        CHECK(std::abs(p.trace().real() - (n + 1)) < 1e-14);
    }
}

TEST_CASE("compress examples") {
    auto b4 = dicke_basis(4);
    CHECK((compress(symmetric_projector(4), b4) - CMat::Identity(5, 5)).norm() < 1e-14);
    CVec d0 = brute_dicke(4, 0);
    CMat e00 = CMat::Zero(5, 5);
    e00(0, 0) = 1.0;
    CHECK((compress(d0 * d0.adjoint(), b4) - e00).norm() < 1e-15);
}

TEST_CASE("compress preserves spectra and round-trips") {
    std::mt19937_64 rng(101);
    for (int t = 0; t < 20; ++t) {
        int n = 2 + t % 4;
        auto b = dicke_basis(n);
        CMat h = random_symmetric_supported(n, 1 + t % (n + 1), rng);
        CMat c = compress(h, b);
        CHECK((expand(c, b) - h).norm() < 1e-12);
        auto e1 = sorted_nonzero_eigs(h, 1e-9);
        auto e2 = sorted_nonzero_eigs(c, 1e-9);
        REQUIRE(e1.size() == e2.size());
        for (size_t i = 0; i < e1.size(); ++i) CHECK(std::abs(e1[i] - e2[i]) < 1e-12 * std::max(1.0, h.norm()));
    }
}

TEST_CASE("compress rejects operators outside the symmetric subspace") {
    CMat x = CMat::Zero(4, 4);
    x(1, 1) = 1.0;  // |01><01|
    CHECK_THROWS_AS(compress(x, dicke_basis(2)), SupportError);
}

TEST_CASE("partial transpose examples and oracle agreement") {
    std::mt19937_64 rng(7);
    // product of single-qubit operators
    std::vector<CMat> s;
    for (int i = 0; i < 4; ++i) s.push_back(random_complex(2, 2, rng));
    CMat prod = kron(kron(kron(s[0], s[1]), s[2]), s[3]);
    CMat expect = kron(kron(kron(s[0].transpose(), s[1]), s[2]), s[3]);
    CHECK((partial_transpose(prod, 4, PartitionSpec::first(1)) - expect).norm() < 1e-14);

    for (int n = 2; n <= 5; ++n) {
        CMat m = random_complex(1 << n, 1 << n, rng);
        for (int mask = 1; mask < (1 << n); ++mask) {
            std::vector<int> parties;
            for (int p = 1; p <= n; ++p)
                if (mask & (1 << (p - 1))) parties.push_back(p);
            PartitionSpec spec{parties};
            CHECK((partial_transpose(m, n, spec) - brute_partial_transpose(m, n, parties)).norm() == 0.0);
        }
    }
}

TEST_CASE("partial transpose rejects bad parties and shapes") {
    CMat m = CMat::Identity(8, 8);
    CHECK_THROWS(partial_transpose(m, 3, PartitionSpec{{4}}));
    CHECK_THROWS(partial_transpose(m, 3, PartitionSpec{{0}}));
    CHECK_THROWS(partial_transpose(CMat::Identity(6, 6), 3, PartitionSpec{{1}}));
}

TEST_CASE("complementary partial transposes have equal rank") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 10; ++t) {
        CMat g = random_complex(16, 3, rng);
        CMat rho = g * g.adjoint();
        CMat a = partial_transpose(rho, 4, PartitionSpec{{1, 3}});
        CMat b = partial_transpose(rho, 4, PartitionSpec{{2, 4}});
        CHECK(numeric_rank(a) == numeric_rank(b));
    }
}

TEST_CASE("compressed partial transpose examples") {
    auto mm = SymmetricState::maximally_mixed(4);
    CMat a = compressed_pt(mm, 1), ab = compressed_pt(mm, 2);
    CHECK(a.rows() == 8);
    CHECK(ab.rows() == 9);
    CHECK(numeric_rank(a) == 8);
    CHECK(numeric_rank(ab) == 9);
    // oracle: full-space partial transposes have the same nonzero spectra
    CMat full = symmetric_projector(4) / 5.0;
    auto ea = sorted_nonzero_eigs(brute_partial_transpose(full, 4, {1}), 1e-12);
    auto eab = sorted_nonzero_eigs(brute_partial_transpose(full, 4, {1, 2}), 1e-12);
    auto ca = sorted_nonzero_eigs(a, 1e-12), cab = sorted_nonzero_eigs(ab, 1e-12);
    REQUIRE(ea.size() == ca.size());
    REQUIRE(eab.size() == cab.size());
    for (size_t i = 0; i < ea.size(); ++i) CHECK(std::abs(ea[i] - ca[i]) < 1e-13);
    for (size_t i = 0; i < eab.size(); ++i) CHECK(std::abs(eab[i] - cab[i]) < 1e-13);

    CMat e00 = CMat::Zero(5, 5);
    e00(0, 0) = 1.0;
    SymmetricState zero(4, e00);
    CHECK(numeric_rank(compressed_pt(zero, 1)) == 1);
    CHECK(numeric_rank(compressed_pt(zero, 2)) == 1);
    CHECK_THROWS_AS(compressed_pt(zero, 3), SizeError);
}

TEST_CASE("rank profile examples") {
    Tolerances tol;
    CHECK(rank_profile(symmetric_projector(4), tol).rank == 5);
    auto z = rank_profile(CMat::Zero(6, 6), tol);
    CHECK(z.rank == 0);
    CHECK(z.kernel_dim() == 6);
    CHECK(rank_profile(rho_db({5, 0.5}).matrix, tol).rank == 6);
    CMat bad = CMat::Zero(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(rank_profile(bad, tol), PreconditionError);
}

TEST_CASE("rank profile invariants") {
    std::mt19937_64 rng(9);
    Tolerances tol;
    for (int t = 0; t < 20; ++t) {
        CMat g = random_complex(7, 1 + t % 7, rng);
        CMat m = g * g.adjoint();
        auto p = rank_profile(m, tol);
        CHECK(p.rank + p.kernel_dim() == 7);
        CHECK(p.rank == numeric_rank(m));
        CHECK((p.range_projector * p.range_projector - p.range_projector).norm() < 1e-12);
        CHECK((p.range_projector - p.range_projector.adjoint()).norm() < 1e-12);
        if (p.kernel_dim() > 0) CHECK((p.kernel_basis.adjoint() * p.kernel_basis - CMat::Identity(p.kernel_dim(), p.kernel_dim())).norm() < 1e-12);
        for (Eigen::Index i = 1; i < p.singular_values.size(); ++i) CHECK(p.singular_values(i - 1) >= p.singular_values(i));
    }
}

TEST_CASE("decreasing the rank tolerance never lowers the rank") {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 20; ++t) {
        RVec ev(6);
        for (int i = 0; i < 6; ++i) ev(i) = std::pow(10.0, -2.0 * i);
        CMat u = random_complex(6, 6, rng).householderQr().householderQ();
        CMat m = u * ev.cast<cplx>().asDiagonal() * u.adjoint();
        int prev = -1;
        for (double rel : {1e-1, 1e-3, 1e-5, 1e-7, 1e-9, 1e-11}) {
            Tolerances tol;
            tol.rank_rel_tol = rel;
            int r = rank_profile(m, tol).rank;
            CHECK(r >= prev);
            prev = r;
        }
    }
}

TEST_CASE("three-rank examples") {
    Tolerances tol;
    auto tr = three_rank(SymmetricState::maximally_mixed(4), tol);
    CHECK(tr == ThreeRank{5, 8, 9});
    CMat e00 = CMat::Zero(5, 5);
    e00(0, 0) = 1.0;
    CHECK(three_rank(SymmetricState(4, e00), tol) == ThreeRank{1, 1, 1});
    CHECK_THROWS_AS(three_rank(SymmetricState::maximally_mixed(3), tol), SizeError);
}

TEST_CASE("symmetric state validation") {
    CMat bad = CMat::Identity(5, 5);
    bad(0, 1) = 0.5;
    CHECK_THROWS_AS(SymmetricState(4, bad), PreconditionError);
    CMat nan = CMat::Identity(5, 5);
    nan(2, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(SymmetricState(4, nan));
    CHECK_THROWS_AS(SymmetricState(4, CMat::Identity(4, 4)), SizeError);
    auto mm = SymmetricState::maximally_mixed(4);
    CHECK(mm.trace_normalized());
    CMat full = mm.to_computational();
    CMat p = symmetric_projector(4);
    CHECK((p * full * p - full).norm() < 1e-12);
    CHECK((SymmetricState::from_computational(4, full).matrix() - mm.matrix()).norm() < 1e-12);
}

TEST_CASE("tolerance validation and environment overrides") {
    Tolerances t;
    CHECK_NOTHROW(t.validate());
    t.rank_rel_tol = 1.0;
    CHECK_THROWS_AS(t.validate(), PreconditionError);
    t = Tolerances{};
    t.psd_tol = 0.0;
    CHECK_THROWS_AS(t.validate(), PreconditionError);
    setenv("PPTSYM_PSD_TOL", "1e-7", 1);
    CHECK(Tolerances::from_env().psd_tol == 1e-7);
    unsetenv("PPTSYM_PSD_TOL");
    CHECK(Tolerances::from_env().psd_tol == 1e-10);
}

TEST_CASE("product vector embedding examples") {
    CVec v = embed_product_vector(Alpha::at(0.0), {false, false, false, false}, 4);
    CHECK(std::abs(v(0) - cplx(1.0)) == 0.0);
    CHECK(v.norm() == 1.0);
    CVec w = embed_product_vector(Alpha::at(cplx(0, 1)), {true, false}, 2);
    CVec expect = kron_vec({local(Alpha::at(cplx(0, -1)), false), local(Alpha::at(cplx(0, 1)), false)});
    CHECK((w - expect).norm() == 0.0);
    CVec inf = embed_product_vector(Alpha::infinity(), {false, false, false, false}, 4);
    CHECK((inf - brute_dicke(4, 4)).norm() == 0.0);
}

TEST_CASE("conjugated product vectors in split coordinates") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 10; ++t) {
        Alpha a = t == 9 ? Alpha::infinity() : Alpha::at(randc(rng));
        for (int k = 0; k <= 2; ++k) {
            std::vector<bool> pattern(4, false);
            for (int i = 0; i < k; ++i) pattern[i] = true;
            std::vector<CVec> fac;
            for (int i = 0; i < 4; ++i) fac.push_back(local(a, pattern[i]));
            CVec full = kron_vec(fac);
            CMat split = k == 0 ? brute_dicke_isometry(4) : kron(brute_dicke_isometry(k), brute_dicke_isometry(4 - k));
            CVec expect = split.adjoint() * full;
            CHECK((conjugated_product_dicke(a, k, 4) - expect).norm() < 1e-12 * std::max(1.0, expect.norm()));
        }
    }
}

TEST_CASE("property: partial transpose is an involution (100 instances)") {
    std::mt19937_64 rng(1001);
    int ok = 0;
    for (int t = 0; t < 100; ++t) {
        int n = 2 + t % 4;
        CMat m = random_complex(1 << n, 1 << n, rng);
        std::vector<int> parties;
        for (int p = 1; p <= n; ++p)
            if (rng() & 1) parties.push_back(p);
        PartitionSpec s{parties};
        CMat back = partial_transpose(partial_transpose(m, n, s), n, s);
        ok += (back == m);
        CMat h = (m + m.adjoint()) / 2.0;
        CMat ph = partial_transpose(h, n, s);
        CHECK((ph - ph.adjoint()).norm() == 0.0);
    }
    CHECK(ok == 100);
}

TEST_CASE("property: symmetrizer idempotence (100 instances)") {
    std::mt19937_64 rng(1002);
    std::vector<CMat> brute(7);
    for (int n = 1; n <= 6; ++n) brute[n] = brute_symmetrizer(n);
    for (int t = 0; t < 100; ++t) {
        int n = 1 + static_cast<int>(rng() % 6);
        CMat p = symmetric_projector(n);
        CHECK((p * p - p).norm() <= 1e-14);
        CHECK((p - brute[n]).norm() <= 1e-13);
        // P projects random vectors into the +1 eigenspace of every swap
        CVec x = random_complex(1 << n, 1, rng).col(0);
        CVec y = p * x;
        if (n >= 2) {
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            CHECK((permutation_operator(perm) * y - y).norm() <= 1e-12 * std::max(1.0, y.norm()));
        }
    }
}

TEST_CASE("property: compressed and full partial transpose ranks agree (100 instances)") {
    std::mt19937_64 rng(1003);
    Tolerances tol;
    int agree = 0;
    for (int t = 0; t < 100; ++t) {
        int n = 4 - (t % 3 == 0 ? 1 : 0);
        int rank = 1 + static_cast<int>(rng() % (n + 1));
        CMat h = random_symmetric_supported(n, rank, rng);
        h /= h.trace().real();
        SymmetricState s(n, compress(h, dicke_basis(n)), tol);
        bool all = true;
        for (int k = 1; k <= n / 2; ++k) {
            std::vector<int> parties;
            for (int p = 1; p <= k; ++p) parties.push_back(p);
            int full = rank_profile(brute_partial_transpose(h, n, parties), tol).rank;
            int comp = rank_profile(compressed_pt(s, k), tol).rank;
            all = all && full == comp;
        }
        agree += all;
    }
    CHECK(agree == 100);
}
