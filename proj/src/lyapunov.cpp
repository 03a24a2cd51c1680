#include "coopstab/lyapunov.hpp"

#include <Eigen/Eigenvalues>

namespace coopstab {

double LyapunovQuadratic::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Mat> es(B);
    return es.eigenvalues().minCoeff();
}

LyapunovQuadratic solve_lyapunov(const Mat& A) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || n == 0) throw std::invalid_argument("solve_lyapunov: A must be square");

    Eigen::EigenSolver<Mat> es(A);
    if (es.eigenvalues().real().maxCoeff() >= 0.0)
        throw std::invalid_argument("unstable matrix");

    // Unknowns b_{ij}, i <= j, packed column-wise.
    const int nu = n * (n + 1) / 2;
    auto pack = [n](int i, int j) {  // i <= j
        return j * (j + 1) / 2 + i;
    };
    Mat system = Mat::Zero(nu, nu);
    Vec rhs = Vec::Zero(nu);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= j; ++i) {
            const int col = pack(i, j);
            // Contribution of the symmetric basis element E = e_i e_j^T (+
            // e_j e_i^T when i != j) to the upper triangle of A^T E + E A.
            Mat e = Mat::Zero(n, n);
            e(i, j) = 1.0;
            if (i != j) e(j, i) = 1.0;
            const Mat s = A.transpose() * e + e * A;
            for (int l = 0; l < n; ++l)
                for (int k = 0; k <= l; ++k) system(pack(k, l), col) = s(k, l);
        }
    }
    for (int i = 0; i < n; ++i) rhs[pack(i, i)] = -1.0;

    Eigen::FullPivLU<Mat> lu(system);
    if (!lu.isInvertible()) throw std::runtime_error("solve_lyapunov: singular linear system");
    const Vec sol = lu.solve(rhs);

    Mat B(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) B(i, j) = B(j, i) = sol[pack(i, j)];
    B = 0.5 * (B + B.transpose()).eval();

    LyapunovQuadratic out;
    out.B = B;
    out.residual_inf = (A.transpose() * B + B * A + Mat::Identity(n, n))
                           .cwiseAbs()
                           .maxCoeff();
    return out;
}

}  // namespace coopstab
