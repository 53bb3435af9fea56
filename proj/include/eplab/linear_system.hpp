#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "eplab/grid.hpp"
#include "eplab/problem.hpp"

namespace eplab {

// Per-solve right-hand side inputs of the linearized boundary value problem.
// F1,F2,f are nodal fields (F is face-averaged during assembly); the arrays
// carry boundary data along the relevant boundary.
struct LinearProblemData {
    Field2D F1, F2, f;
    std::vector<double> gW;     // total-flux datum at x1 = 0 (potential U rows), size ny+1
    std::vector<double> gE;     // total-flux datum at x1 = L (stream U rows), size ny+1
    std::vector<double> vN;     // Neumann datum for V at x1 = L, size ny+1
    std::vector<double> hD;     // Dirichlet V at x1 = 0, size ny+1
    std::vector<double> uD0;    // Dirichlet U at x1 = 0 (stream), size ny+1
    std::vector<double> uDL;    // Dirichlet U at x1 = L (potential), size ny+1
    std::vector<double> uDwall_lo; // Dirichlet U at x2 = 0 (stream), size nx+1
    std::vector<double> uDwall_hi; // Dirichlet U at x2 = ell (stream), size nx+1

    static LinearProblemData zeros(const NozzleGrid& g) {
        LinearProblemData d;
        d.F1 = Field2D(g);
        d.F2 = Field2D(g);
        d.f = Field2D(g);
        d.gW.assign(g.ny + 1, 0.0);
        d.gE.assign(g.ny + 1, 0.0);
        d.vN.assign(g.ny + 1, 0.0);
        d.hD.assign(g.ny + 1, 0.0);
        d.uD0.assign(g.ny + 1, 0.0);
        d.uDL.assign(g.ny + 1, 0.0);
        d.uDwall_lo.assign(g.nx + 1, 0.0);
        d.uDwall_hi.assign(g.nx + 1, 0.0);
        return d;
    }
};

// Conservative vertex-centered discretization of the linearized system.
// Flux form on control volumes (half cells along boundaries):
//   U rows:  sum of face fluxes of (A_diag grad U + V cz - F),
//   V rows:  lap * Lap_fv(V) - bz V - bq . grad U = f,
// with Dirichlet rows eliminated by identity-row replacement and Neumann /
// conormal data entering as prescribed face fluxes.
class EllipticOperator {
  public:
    explicit EllipticOperator(OperatorCoefficients coefs)
        : c_(std::move(coefs)), g_(c_.grid), N_(g_.num_nodes()) {
        assemble_matrix();
    }

    const NozzleGrid& grid() const { return g_; }
    const OperatorCoefficients& coefficients() const { return c_; }
    const Eigen::SparseMatrix<double>& matrix() const { return A_; }

    int index_u(int i, int j) const { return i * (g_.ny + 1) + j; }
    int index_v(int i, int j) const { return N_ + index_u(i, j); }

    bool dirichlet_u(int i, int j) const {
        if (c_.form == Formulation::potential) return i == g_.nx;
        return i == 0 || j == 0 || j == g_.ny;
    }
    bool dirichlet_v(int i, int /*j*/) const { return i == 0; }

    Eigen::VectorXd build_rhs(const LinearProblemData& d) const {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * N_);
        for (int i = 0; i <= g_.nx; ++i) {
            for (int j = 0; j <= g_.ny; ++j) {
                // U equation
                if (dirichlet_u(i, j)) {
                    double datum = 0.0;
                    if (c_.form == Formulation::potential) {
                        datum = d.uDL[j];
                    } else if (i == 0) {
                        datum = d.uD0[j];
                    } else {
                        datum = (j == 0) ? d.uDwall_lo[i] : d.uDwall_hi[i];
                    }
                    b[index_u(i, j)] = datum;
                } else {
                    const double wx = cv_wx(i), wy = cv_wy(j);
                    double r = 0.0;
                    if (i < g_.nx) r += 0.5 * (d.F1(i, j) + d.F1(i + 1, j)) / wx;
                    else r -= d.gE[j] / wx; // stream Gamma_L face datum
                    if (i > 0) r -= 0.5 * (d.F1(i - 1, j) + d.F1(i, j)) / wx;
                    else r += d.gW[j] / wx; // potential Gamma_0 face datum
                    if (j < g_.ny) r += 0.5 * (d.F2(i, j) + d.F2(i, j + 1)) / wy;
                    if (j > 0) r -= 0.5 * (d.F2(i, j - 1) + d.F2(i, j)) / wy;
                    b[index_u(i, j)] = r;
                }
                // V equation
                if (dirichlet_v(i, j)) {
                    b[index_v(i, j)] = d.hD[j];
                } else {
                    double r = d.f(i, j);
                    if (i == g_.nx) r -= c_.lap[i] * d.vN[j] / cv_wx(i);
                    b[index_v(i, j)] = r;
                }
            }
        }
        return b;
    }

    // Direct sparse solve; the factorization is computed once and reused.
    // Contract: ||Ax - b||_inf <= 1e-10 ||b||_inf.
    std::pair<Field2D, Field2D> solve(const LinearProblemData& d) {
        const Eigen::VectorXd b = build_rhs(d);
        factorize();
        Eigen::VectorXd x = lu_->solve(b);
        if (lu_->info() != Eigen::Success) throw SolverError("sparse LU solve failed");
        const double resid = (A_ * x - b).cwiseAbs().maxCoeff();
        const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
        if (resid > 1e-10 * scale)
            throw SolverError("linear solve residual " + std::to_string(resid) +
                              " exceeds contract (rhs scale " + std::to_string(scale) + ")");
        Field2D U(g_), V(g_);
        for (int i = 0; i <= g_.nx; ++i)
            for (int j = 0; j <= g_.ny; ++j) {
                U(i, j) = x[index_u(i, j)];
                V(i, j) = x[index_v(i, j)];
            }
        U.require_finite("U");
        V.require_finite("V");
        return {std::move(U), std::move(V)};
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return A_ * x; }

    Eigen::VectorXd pack(const Field2D& U, const Field2D& V) const {
        Eigen::VectorXd x(2 * N_);
        for (int i = 0; i <= g_.nx; ++i)
            for (int j = 0; j <= g_.ny; ++j) {
                x[index_u(i, j)] = U(i, j);
                x[index_v(i, j)] = V(i, j);
            }
        return x;
    }

  private:
    double cv_wx(int i) const { return (i == 0 || i == g_.nx) ? 0.5 * g_.hx : g_.hx; }
    double cv_wy(int j) const { return (j == 0 || j == g_.ny) ? 0.5 * g_.hy : g_.hy; }

    void assemble_matrix() {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(std::size_t(N_) * 14);
        const double hx = g_.hx, hy = g_.hy;

        for (int i = 0; i <= g_.nx; ++i) {
            for (int j = 0; j <= g_.ny; ++j) {
                const int ru = index_u(i, j);
                const int rv = index_v(i, j);

                if (dirichlet_u(i, j)) {
                    trip.emplace_back(ru, ru, 1.0);
                } else {
                    const double wx = cv_wx(i), wy = cv_wy(j);
                    // east / west x-faces: a_f (U_R - U_L)/hx + c_f (V_L + V_R)/2
                    if (i < g_.nx) {
                        const double af = 0.5 * (c_.a11[i] + c_.a11[i + 1]);
                        const double cf = 0.5 * (c_.cz1[i] + c_.cz1[i + 1]);
                        trip.emplace_back(ru, index_u(i + 1, j), af / (hx * wx));
                        trip.emplace_back(ru, index_u(i, j), -af / (hx * wx));
                        trip.emplace_back(ru, index_v(i, j), 0.5 * cf / wx);
                        trip.emplace_back(ru, index_v(i + 1, j), 0.5 * cf / wx);
                    }
                    if (i > 0) {
                        const double af = 0.5 * (c_.a11[i - 1] + c_.a11[i]);
                        const double cf = 0.5 * (c_.cz1[i - 1] + c_.cz1[i]);
                        trip.emplace_back(ru, index_u(i - 1, j), af / (hx * wx));
                        trip.emplace_back(ru, index_u(i, j), -af / (hx * wx));
                        trip.emplace_back(ru, index_v(i - 1, j), -0.5 * cf / wx);
                        trip.emplace_back(ru, index_v(i, j), -0.5 * cf / wx);
                    }
                    // north / south y-faces: a22 (U_T - U_B)/hy + cz2 (V_B + V_T)/2,
                    // wall faces carry zero total flux
                    if (j < g_.ny) {
                        trip.emplace_back(ru, index_u(i, j + 1), c_.a22[i] / (hy * wy));
                        trip.emplace_back(ru, index_u(i, j), -c_.a22[i] / (hy * wy));
                        trip.emplace_back(ru, index_v(i, j), 0.5 * c_.cz2[i] / wy);
                        trip.emplace_back(ru, index_v(i, j + 1), 0.5 * c_.cz2[i] / wy);
                    }
                    if (j > 0) {
                        trip.emplace_back(ru, index_u(i, j - 1), c_.a22[i] / (hy * wy));
                        trip.emplace_back(ru, index_u(i, j), -c_.a22[i] / (hy * wy));
                        trip.emplace_back(ru, index_v(i, j - 1), -0.5 * c_.cz2[i] / wy);
                        trip.emplace_back(ru, index_v(i, j), -0.5 * c_.cz2[i] / wy);
                    }
                }

                if (dirichlet_v(i, j)) {
                    trip.emplace_back(rv, rv, 1.0);
                } else {
                    const double wx = cv_wx(i), wy = cv_wy(j);
                    const double lap = c_.lap[i];
                    if (i < g_.nx) {
                        trip.emplace_back(rv, index_v(i + 1, j), lap / (hx * wx));
                        trip.emplace_back(rv, index_v(i, j), -lap / (hx * wx));
                    }
                    if (i > 0) {
                        trip.emplace_back(rv, index_v(i - 1, j), lap / (hx * wx));
                        trip.emplace_back(rv, index_v(i, j), -lap / (hx * wx));
                    }
                    if (j < g_.ny) {
                        trip.emplace_back(rv, index_v(i, j + 1), lap / (hy * wy));
                        trip.emplace_back(rv, index_v(i, j), -lap / (hy * wy));
                    }
                    if (j > 0) {
                        trip.emplace_back(rv, index_v(i, j - 1), lap / (hy * wy));
                        trip.emplace_back(rv, index_v(i, j), -lap / (hy * wy));
                    }
                    trip.emplace_back(rv, rv, -c_.bz[i]);
                    // -bq . grad U with the nodal stencils
                    if (c_.bq1[i] != 0.0) {
                        const double s = -c_.bq1[i];
                        if (i == 0) {
                            trip.emplace_back(rv, index_u(0, j), s * -3.0 / (2.0 * hx));
                            trip.emplace_back(rv, index_u(1, j), s * 4.0 / (2.0 * hx));
                            trip.emplace_back(rv, index_u(2, j), s * -1.0 / (2.0 * hx));
                        } else if (i == g_.nx) {
                            trip.emplace_back(rv, index_u(g_.nx, j), s * 3.0 / (2.0 * hx));
                            trip.emplace_back(rv, index_u(g_.nx - 1, j), s * -4.0 / (2.0 * hx));
                            trip.emplace_back(rv, index_u(g_.nx - 2, j), s * 1.0 / (2.0 * hx));
                        } else {
                            trip.emplace_back(rv, index_u(i + 1, j), s / (2.0 * hx));
                            trip.emplace_back(rv, index_u(i - 1, j), -s / (2.0 * hx));
                        }
                    }
                    if (c_.bq2[i] != 0.0) {
                        const double s = -c_.bq2[i];
                        const bool oneside = (c_.form == Formulation::stream);
                        if (j == 0) {
                            if (oneside) {
                                trip.emplace_back(rv, index_u(i, 0), s * -3.0 / (2.0 * hy));
                                trip.emplace_back(rv, index_u(i, 1), s * 4.0 / (2.0 * hy));
                                trip.emplace_back(rv, index_u(i, 2), s * -1.0 / (2.0 * hy));
                            } // potential walls: grad U . n = 0, term vanishes
                        } else if (j == g_.ny) {
                            if (oneside) {
                                trip.emplace_back(rv, index_u(i, g_.ny), s * 3.0 / (2.0 * hy));
                                trip.emplace_back(rv, index_u(i, g_.ny - 1), s * -4.0 / (2.0 * hy));
                                trip.emplace_back(rv, index_u(i, g_.ny - 2), s * 1.0 / (2.0 * hy));
                            }
                        } else {
                            trip.emplace_back(rv, index_u(i, j + 1), s / (2.0 * hy));
                            trip.emplace_back(rv, index_u(i, j - 1), -s / (2.0 * hy));
                        }
                    }
                }
            }
        }

        A_.resize(2 * N_, 2 * N_);
        A_.setFromTriplets(trip.begin(), trip.end());
        A_.makeCompressed();
    }

    void factorize() {
        if (lu_) return;
        lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
        lu_->analyzePattern(A_);
        lu_->factorize(A_);
        if (lu_->info() != Eigen::Success) {
            lu_.reset();
            throw SolverError("sparse LU factorization failed (singular assembly?)");
        }
    }

    OperatorCoefficients c_;
    NozzleGrid g_;
    int N_;
    Eigen::SparseMatrix<double> A_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

} // namespace eplab
