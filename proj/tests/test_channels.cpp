#include <catch2/catch_amalgamated.hpp>

#include "qmetric/channel.hpp"
#include "qmetric/random.hpp"

using namespace qmetric;

namespace {

Complex hs_inner(const Matrix& A, const Matrix& B) { return (A.adjoint() * B).trace(); }

} // namespace

TEST_CASE("apply fixtures: identity and pinching") {
    Rng rng(31);
    const Matrix X = random_complex_matrix(3, 3, rng);
    REQUIRE(max_abs(identity_channel(3).apply(X) - X) <= 1e-15);

    // Pinching by {E11, E22} zeroes the off-diagonal entries.
    const KrausChannel pinch({matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)});
    REQUIRE(pinch.classification() == ChannelClass::cptp);
    Matrix Y(2, 2);
    Y << Complex(1, 0), Complex(2, 3), Complex(2, -3), Complex(4, 0);
    const Matrix out = pinch.apply(Y);
    REQUIRE(std::abs(out(0, 1)) <= 1e-15);
    REQUIRE(std::abs(out(0, 0) - Y(0, 0)) <= 1e-15);
    REQUIRE(std::abs(out(1, 1) - Y(1, 1)) <= 1e-15);

    REQUIRE_THROWS_AS(identity_channel(3).apply(Matrix::Identity(2, 2)), DimensionMismatch);
    REQUIRE_THROWS_AS(KrausChannel({}), DimensionMismatch);
    REQUIRE_THROWS_AS(KrausChannel({Matrix::Identity(2, 2), Matrix::Identity(3, 3)}),
                      DimensionMismatch);
}

TEST_CASE("random CPTNI maps preserve positivity and shrink the trace") {
    Rng rng(32);
    for (int t = 0; t < 500; ++t) {
        const int n = 2 + int(rng.uniform_int(4));
        const int m = 2 + int(rng.uniform_int(4));
        const int k = (n + m - 1) / m + int(rng.uniform_int(2));
        const double slack = t % 4 == 0 ? 0.0 : rng.uniform();
        const KrausChannel T = random_cptni(n, m, k, slack, rng);
        REQUIRE(T.is_cptni());
        const Matrix rho = random_psd(n, rng);
        const Matrix sig = T.apply(rho);
        REQUIRE(is_psd(sig, 1e-10 * std::max(1.0, spectral_norm(sig))));
        REQUIRE(sig.trace().real() <= rho.trace().real() + 1e-10 * rho.trace().real());
        REQUIRE(std::abs(sig.trace().imag()) <= 1e-12 * rho.trace().real());
    }
}

TEST_CASE("adjoint_apply satisfies the Hilbert-Schmidt duality") {
    Rng rng(33);
    for (int t = 0; t < 100; ++t) {
        const int n = 2 + int(rng.uniform_int(3));
        const int m = 2 + int(rng.uniform_int(3));
        const KrausChannel T = random_cptni(n, m, (n + m - 1) / m + 1, 0.3, rng);
        const Matrix X = random_complex_matrix(n, n, rng);
        const Matrix Y = random_complex_matrix(m, m, rng);
        const Complex lhs = hs_inner(Y, T.apply(X));
        const Complex rhs = hs_inner(T.adjoint_apply(Y), X);
        REQUIRE(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
    // CPTP adjoints are unital.
    const KrausChannel S = random_cptni(3, 4, 2, 0.0, rng);
    REQUIRE(S.classification() == ChannelClass::cptp);
    REQUIRE(max_abs(S.adjoint_apply(Matrix::Identity(4, 4)) -
                    Matrix(Matrix::Identity(3, 3))) <= 1e-12);
}

TEST_CASE("embedding S1 and partial trace S2") {
    const KrausChannel s1_1 = embed_channel_S1(1);
    Rng rng(34);
    const Matrix E = random_complex_matrix(2, 2, rng);
    REQUIRE(max_abs(s1_1.apply(E) - E) <= 1e-15);

    const KrausChannel s1 = embed_channel_S1(2);
    REQUIRE(s1.classification() == ChannelClass::cptp);
    const Matrix expected = kron(matrix_unit(2, 0, 1), Matrix(Matrix::Identity(2, 2) / 2.0));
    REQUIRE(max_abs(s1.apply(matrix_unit(2, 0, 1)) - expected) <= 1e-15);

    for (int m = 1; m <= 4; ++m) {
        const KrausChannel a = embed_channel_S1(m);
        const KrausChannel b = partial_trace_channel_S2(m);
        REQUIRE(b.classification() == ChannelClass::cptp);
        const Matrix X = random_complex_matrix(2, 2, rng);
        REQUIRE(max_abs(b.apply(a.apply(X)) - X) <= 1e-12);
        const Matrix big = random_complex_matrix(2 * m, 2 * m, rng);
        REQUIRE(max_abs(b.apply(big) - partial_trace_second(big, m)) <= 1e-12);
    }
}

TEST_CASE("corner T1 and injection T2") {
    const KrausChannel t1 = corner_channel_T1(2);
    Rng rng(35);
    const Matrix X = random_complex_matrix(2, 2, rng);
    REQUIRE(max_abs(t1.apply(X) - X) <= 1e-15);
    REQUIRE(t1.classification() == ChannelClass::cptp);

    const KrausChannel t1_4 = corner_channel_T1(4);
    REQUIRE(t1_4.classification() == ChannelClass::cptni_strict);
    REQUIRE(max_abs(t1_4.apply(matrix_unit(4, 2, 2))) <= 1e-15);

    const KrausChannel t2 = inject_channel_T2(4);
    REQUIRE(t2.classification() == ChannelClass::cptp);
    REQUIRE(max_abs(t1_4.apply(t2.apply(X)) - X) <= 1e-15);
    const Matrix emb = t2.apply(X);
    REQUIRE(max_abs(emb.bottomRightCorner(2, 2)) <= 1e-15);
}

TEST_CASE("complete_to_cptp produces an exact CPTP extension") {
    Rng rng(36);

    // Already CPTP: completion adds no effective Kraus weight.
    const KrausChannel id2 = identity_channel(2);
    const KrausChannel done = complete_to_cptp(id2, Matrix::Identity(2, 2) / 2.0);
    REQUIRE(done.classification() == ChannelClass::cptp);
    const Matrix W = random_complex_matrix(2, 2, rng);
    REQUIRE(max_abs(done.apply(W) - W) <= 1e-12);

    // Halved identity: rho -> rho/2 + (Tr rho / 2) sigma.
    const KrausChannel half({Matrix(Matrix::Identity(2, 2) / std::sqrt(2.0))});
    const Matrix sigma = Matrix::Identity(2, 2) / 2.0;
    const KrausChannel ext = complete_to_cptp(half, sigma);
    REQUIRE(ext.classification() == ChannelClass::cptp);
    const Matrix rho = random_psd(2, rng);
    const Matrix got = ext.apply(rho);
    const Matrix want = 0.5 * rho + (rho.trace() / 2.0) * sigma;
    REQUIRE(max_abs(got - want) <= 1e-10);

    // Random completions: Kraus gram equals the identity, and the extension
    // agrees with the affine formula on arbitrary inputs.
    for (int t = 0; t < 40; ++t) {
        const int n = 2 + int(rng.uniform_int(3));
        const int m = 2 + int(rng.uniform_int(3));
        const KrausChannel T = random_cptni(n, m, (n + m - 1) / m + 1, 0.5, rng);
        const Matrix s = random_unit_trace_psd(m, rng);
        const KrausChannel full = complete_to_cptp(T, s);
        REQUIRE(max_abs(full.gram() - Matrix(Matrix::Identity(n, n))) <= 1e-10);
        const Matrix A = random_complex_matrix(n, n, rng);
        const Matrix affine = T.apply(A) + (A.trace() - T.apply(A).trace()) * s;
        REQUIRE(max_abs(full.apply(A) - affine) <= 1e-10 * std::max(1.0, max_abs(affine)));
    }

    REQUIRE_THROWS_AS(complete_to_cptp(half, Matrix(2.0 * sigma)), NotUnitTrace);
    const KrausChannel inflating({Matrix(1.2 * Matrix::Identity(2, 2))});
    REQUIRE_THROWS_AS(complete_to_cptp(inflating, sigma), NotCptni);
    Matrix indefinite(2, 2);
    indefinite << 1.5, 0.0, 0.0, -0.5;
    REQUIRE_THROWS_AS(complete_to_cptp(half, indefinite), DomainViolation);
}

TEST_CASE("random_cptni classification depends on the slack") {
    Rng rng(37);
    const KrausChannel exact = random_cptni(3, 2, 2, 0.0, rng);
    REQUIRE(exact.classification() == ChannelClass::cptp);
    REQUIRE(exact.defect_norm() <= 1e-12);

    bool saw_strict = false;
    for (int t = 0; t < 20; ++t) {
        const KrausChannel shrunk = random_cptni(3, 2, 2, 0.5, rng);
        REQUIRE(max_eigenvalue(shrunk.gram()) <= 1.0 + 1e-10);
        saw_strict |= shrunk.classification() == ChannelClass::cptni_strict;
    }
    REQUIRE(saw_strict);

    Rng r1(99);
    Rng r2(99);
    const KrausChannel T1 = random_cptni(3, 3, 2, 0.25, r1);
    const KrausChannel T2 = random_cptni(3, 3, 2, 0.25, r2);
    for (std::size_t k = 0; k < T1.kraus().size(); ++k)
        REQUIRE(T1.kraus()[k] == T2.kraus()[k]);

    REQUIRE_THROWS_AS(random_cptni(4, 2, 1, 0.0, rng), DimensionMismatch);
    REQUIRE_THROWS_AS(random_cptni(2, 2, 1, 1.5, rng), DomainViolation);
}

TEST_CASE("Choi matrices certify complete positivity") {
    const Matrix choi_id = choi_matrix(identity_channel(2));
    REQUIRE(std::abs(choi_id.trace().real() - 2.0) <= 1e-12);
    const auto sd = eig_hermitian(choi_id);
    REQUIRE(sd.eigenvalues(sd.eigenvalues.size() - 1) >= 2.0 - 1e-12);  // rank one
    REQUIRE(std::abs(sd.eigenvalues(sd.eigenvalues.size() - 2)) <= 1e-12);
    REQUIRE(is_psd(choi_id));

    Rng rng(38);
    for (int t = 0; t < 25; ++t) {
        const int n = 2 + int(rng.uniform_int(3));
        const int m = 2 + int(rng.uniform_int(3));
        const KrausChannel T = random_cptni(n, m, (n + m - 1) / m + 1, 0.4, rng);
        const Matrix choi = choi_matrix(T);
        REQUIRE(is_psd(choi, 1e-9 * std::max(1.0, spectral_norm(choi))));
    }

    // Transposition is positive but not completely positive.
    const Matrix choi_t = choi_matrix(2, [](const Matrix& X) { return Matrix(X.transpose()); });
    REQUIRE(min_eigenvalue(choi_t) <= -0.9);
}
