#pragma once

// Independent oracle for the filiform group law: the faithful affine matrix
// realization of R^n x| R. The algebra embeds as
//   X(p) = [[ x_1 N, u ], [0, 0]],  N eps_i = eps_{i+1},  u = (x_2..x_{n+1}),
// and the product is log(exp Xp * exp Xq), all exact over rationals.

#include <vector>

#include "qsim/filiform.hpp"

namespace qsim_test {

using qsim::FilPoint;
using qsim::Rat;

using RMat = std::vector<std::vector<Rat>>;

inline RMat rmat_zero(int n) { return RMat(n, std::vector<Rat>(n, Rat(0))); }

inline RMat rmat_identity(int n) {
    RMat I = rmat_zero(n);
    for (int i = 0; i < n; ++i) I[i][i] = 1;
    return I;
}

inline RMat rmat_mul(const RMat& A, const RMat& B) {
    int n = static_cast<int>(A.size());
    RMat C = rmat_zero(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            if (A[i][k] == 0) continue;
            for (int j = 0; j < n; ++j) C[i][j] += A[i][k] * B[k][j];
        }
    return C;
}

inline RMat rmat_add(const RMat& A, const RMat& B, const Rat& s) {
    int n = static_cast<int>(A.size());
    RMat C = A;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) C[i][j] += s * B[i][j];
    return C;
}

inline RMat algebra_matrix(const FilPoint& p) {
    int n = p.step;
    RMat X = rmat_zero(n + 1);
    for (int i = 0; i + 1 < n; ++i) X[i + 1][i] = p.c[0];  // x_1 * N
    for (int i = 0; i < n; ++i) X[i][n] = p.c[i + 1];      // translation column
    return X;
}

inline RMat rmat_exp(const RMat& X) {
    int n = static_cast<int>(X.size());
    RMat E = rmat_identity(n);
    RMat term = rmat_identity(n);
    Rat fact(1);
    for (int k = 1; k <= n + 1; ++k) {
        term = rmat_mul(term, X);
        fact *= k;
        E = rmat_add(E, term, Rat(1) / fact);
    }
    return E;
}

inline RMat rmat_log(const RMat& M) {
    int n = static_cast<int>(M.size());
    RMat B = rmat_add(M, rmat_identity(n), Rat(-1));  // M - I
    RMat L = rmat_zero(n);
    RMat term = rmat_identity(n);
    for (int k = 1; k <= n + 1; ++k) {
        term = rmat_mul(term, B);
        L = rmat_add(L, term, Rat(k % 2 == 1 ? 1 : -1) / Rat(k));
    }
    return L;
}

inline FilPoint coords_of(int step, const RMat& X) {
    FilPoint p(step);
    p.c[0] = step >= 2 ? X[1][0] : Rat(0);
    for (int i = 0; i < step; ++i) p.c[i + 1] = X[i][step];
    return p;
}

inline FilPoint oracle_mul(const FilPoint& p, const FilPoint& q) {
    RMat M = rmat_mul(rmat_exp(algebra_matrix(p)), rmat_exp(algebra_matrix(q)));
    return coords_of(p.step, rmat_log(M));
}

}  // namespace qsim_test
