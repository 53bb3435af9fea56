#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eplab/linear_system.hpp"
#include "eplab/problem.hpp"

namespace eplab {

// Pointwise (A, B) evaluation shared by both formulations.
struct PointAB {
    Vec2 A;
    double B;
};

inline PointAB eval_AB(Formulation form, const PressureLaw& law, const GridBackground& bg,
                       double z, const Vec2& q) {
    if (form == Formulation::potential) {
        auto fs = potential::flux_and_source(law, PotentialPoint{z, q, bg.K0});
        return {fs.A, fs.B};
    }
    auto fs = stream::flux_and_source(StreamPoint{z, q, bg.k0, bg.gamma});
    return {fs.A, fs.B};
}

struct PointDerivs {
    Mat2 dA_dq;
    Vec2 dA_dz;
    Vec2 dB_dq;
    double dB_dz;
};

inline PointDerivs eval_derivs(Formulation form, const PressureLaw& law,
                               const GridBackground& bg, double z, const Vec2& q) {
    if (form == Formulation::potential) {
        auto J = potential::jacobians(law, PotentialPoint{z, q, bg.K0});
        return {J.dA_dq, J.dA_dz, J.dB_dq, J.dB_dz};
    }
    auto J = stream::stream_jacobians(StreamPoint{z, q, bg.k0, bg.gamma});
    return {J.dA_dq, J.dA_dz, J.dB_dq, J.dB_dz};
}

struct Remainders {
    Field2D F1, F2, f;
};

struct PicardConfig {
    double tol = 1e-10;
    int max_iter = 100;
    double damping = 1.0;
};

struct IterationReport {
    std::vector<double> residual_history;   // max-norm update sizes
    std::vector<double> contraction_ratios; // successive quotients
    bool converged = false;
    int iterations = 0;
    double final_nonlinear_residual = 0.0; // fixed-point defect in solution units

    // Geometric mean of the ratios measured while updates stayed well above
    // the roundoff floor.
    double representative_ratio(double floor) const {
        double log_sum = 0.0;
        int n = 0;
        for (std::size_t k = 1; k < residual_history.size(); ++k) {
            if (residual_history[k] < floor || residual_history[k - 1] < floor) break;
            log_sum += std::log(residual_history[k] / residual_history[k - 1]);
            ++n;
        }
        return n ? std::exp(log_sum / n) : 0.0;
    }
};

struct SolutionState {
    Formulation form = Formulation::potential;
    NozzleGrid grid;
    Field2D primary; // total phi (potential) or psi (stream)
    Field2D Phi;     // total electrostatic / gravitational potential
    Field2D U, V;    // perturbations from the background extension
    Field2D rho, u1, u2, mach;
    Field2D q1, q2;  // gradient of the primary variable (nodal stencils)
    double margin_min = 0.0; // delta_star (potential) or lambda_star (stream)
    double rho_min = 0.0, rho_max = 0.0;
    double lambda0 = 0.0, Lambda0 = 0.0; // background ellipticity bounds
    double K = 0.0;     // pseudo-Bernoulli constant (K0 or k0)
    double gamma = 0.0; // adiabatic exponent of the law used
    bool subsonic = false;
};

// The discrete nonlinear problem for one formulation on one grid: remainder
// evaluation, Picard iteration (lagged remainders through the factorized
// background operator), and a full-Jacobian Newton used as a cross-check.
class NonlinearProblem {
  public:
    NonlinearProblem(Formulation form, const PressureLaw& law, const NozzleGrid& grid,
                     const GridBackground& bg, const DopingProfile& doping,
                     const BoundaryData& bdata)
        : form_(form), law_(law), grid_(grid), bg_(bg), doping_(doping),
          coefs_(OperatorCoefficients::build(form, law, bg, doping, grid)), op_(coefs_) {
        bdata.validate(doping.field_case, grid.ell);
        const int ny = grid.ny;
        g0v_.resize(ny + 1);
        h0v_.resize(ny + 1);
        vLv_.resize(ny + 1);
        uD0v_.resize(ny + 1);
        for (int j = 0; j <= ny; ++j) {
            const double y = grid.x2(j);
            g0v_[j] = bdata.g0.value(y);
            h0v_[j] = bdata.h0.value(y);
            vLv_[j] = bdata.vL.value(y);
            uD0v_[j] = bdata.g0.antideriv(y) - bdata.g0.antideriv(0.0);
        }
        g0_wall_hi_ = bdata.g0.antideriv(grid.ell) - bdata.g0.antideriv(0.0);
    }

    const NozzleGrid& grid() const { return grid_; }
    const GridBackground& background() const { return bg_; }
    const OperatorCoefficients& coefficients() const { return coefs_; }
    EllipticOperator& op() { return op_; }
    Formulation formulation() const { return form_; }
    const PressureLaw& law() const { return law_; }

    std::pair<double, Vec2> node_state(const Field2D& U, const Field2D& V, int i, int j) const {
        const double z = bg_.Phi[i] + V(i, j);
        const Vec2 qb = bg_.q_pivot(form_, i);
        const Vec2 q{qb[0] + ddx_node(U, grid_, i, j),
                     qb[1] + ddy_node(U, grid_, i, j, form_)};
        return {z, q};
    }

    // Second-order Taylor remainders of (A, B) about the background state,
    //   -F_i = A_i(zb+V, qb+qh) - A_i(zb,qb) - dA_i/dq_j qh_j - V dA_i/dz,
    //   f    = B(zb+V, qb+qh) - B(zb,qb) - dB/dz V - dB/dq . qh,
    // evaluated at the nodes with the same gradient stencils the V-equation
    // uses. Both vanish identically at zero perturbation.
    Remainders taylor_remainders(const Field2D& U, const Field2D& V) const {
        Remainders r{Field2D(grid_), Field2D(grid_), Field2D(grid_)};
        for (int i = 0; i <= grid_.nx; ++i) {
            const Vec2 qb = bg_.q_pivot(form_, i);
            const double zb = bg_.Phi[i];
            const PointAB base = eval_AB(form_, law_, bg_, zb, qb);
            for (int j = 0; j <= grid_.ny; ++j) {
                const double v = V(i, j);
                const Vec2 qh{ddx_node(U, grid_, i, j), ddy_node(U, grid_, i, j, form_)};
                try {
                    const PointAB full =
                        eval_AB(form_, law_, bg_, zb + v, {qb[0] + qh[0], qb[1] + qh[1]});
                    for (int k = 0; k < 2; ++k) {
                        double lin = v * (k == 0 ? coefs_.cz1[i] : coefs_.cz2[i]);
                        lin += (k == 0 ? coefs_.a11[i] * qh[0] : coefs_.a22[i] * qh[1]);
                        const double rem = full.A[k] - base.A[k] - lin;
                        (k == 0 ? r.F1 : r.F2)(i, j) = -rem;
                    }
                    r.f(i, j) = full.B - base.B - coefs_.bz[i] * v -
                                coefs_.bq1[i] * qh[0] - coefs_.bq2[i] * qh[1];
                } catch (const std::exception& e) {
                    rethrow_with_node(e, i, j);
                }
            }
        }
        return r;
    }

    LinearProblemData linear_data(const Field2D& U, const Field2D& V) const {
        LinearProblemData d = LinearProblemData::zeros(grid_);
        Remainders r = taylor_remainders(U, V);
        d.F1 = std::move(r.F1);
        d.F2 = std::move(r.F2);
        d.f = std::move(r.f);
        d.hD = h0v_;
        d.vN = vLv_;
        if (form_ == Formulation::potential) {
            d.gW = g0v_;
        } else {
            d.uD0 = uD0v_;
            std::fill(d.uDwall_lo.begin(), d.uDwall_lo.end(), 0.0);
            std::fill(d.uDwall_hi.begin(), d.uDwall_hi.end(), g0_wall_hi_);
        }
        return d;
    }

    std::pair<SolutionState, IterationReport>
    picard_solve(const PicardConfig& cfg = {}, const Field2D* U0 = nullptr,
                 const Field2D* V0 = nullptr) {
        Field2D U = U0 ? *U0 : Field2D(grid_);
        Field2D V = V0 ? *V0 : Field2D(grid_);
        IterationReport rep;
        double prev = std::numeric_limits<double>::infinity();
        int growing = 0;
        for (int k = 0; k < cfg.max_iter; ++k) {
            auto [Un, Vn] = op_.solve(linear_data(U, V));
            if (cfg.damping != 1.0) {
                for (std::size_t m = 0; m < Un.v.size(); ++m) {
                    Un.v[m] = (1.0 - cfg.damping) * U.v[m] + cfg.damping * Un.v[m];
                    Vn.v[m] = (1.0 - cfg.damping) * V.v[m] + cfg.damping * Vn.v[m];
                }
            }
            const double delta = std::max(max_abs_diff(U, Un), max_abs_diff(V, Vn));
            rep.residual_history.push_back(delta);
            if (rep.residual_history.size() >= 2) {
                const double prev_r = rep.residual_history[rep.residual_history.size() - 2];
                if (prev_r > 0.0) rep.contraction_ratios.push_back(delta / prev_r);
            }
            U = std::move(Un);
            V = std::move(Vn);
            rep.iterations = k + 1;
            if (delta <= cfg.tol) {
                rep.converged = true;
                break;
            }
            if (!(delta < 1e12) || U.max_abs() > 1e12 || V.max_abs() > 1e12)
                throw DivergenceError("Picard iterate blew up at iteration " +
                                      std::to_string(k + 1));
            growing = (delta > prev) ? growing + 1 : 0;
            if (growing >= 5)
                throw DivergenceError("Picard residual grew for 5 consecutive iterations "
                                      "(last update " + std::to_string(delta) + ")");
            prev = delta;
        }
        if (rep.converged) {
            // fixed-point defect in solution units: one more application of
            // the Picard map
            auto [Ur, Vr] = op_.solve(linear_data(U, V));
            rep.final_nonlinear_residual = std::max(max_abs_diff(U, Ur), max_abs_diff(V, Vr));
        }
        return {build_state(U, V), rep};
    }

    // Newton on the assembled nonlinear residual R(x) = A x - b(x), with the
    // exact Jacobian A - db/dx. Non-default; used to cross-check Picard.
    std::pair<SolutionState, IterationReport>
    newton_solve(const PicardConfig& cfg = {}, const Field2D* U0 = nullptr,
                 const Field2D* V0 = nullptr) {
        Field2D U = U0 ? *U0 : Field2D(grid_);
        Field2D V = V0 ? *V0 : Field2D(grid_);
        IterationReport rep;
        for (int k = 0; k < cfg.max_iter; ++k) {
            const Eigen::VectorXd x = op_.pack(U, V);
            const Eigen::VectorXd r = op_.apply(x) - op_.build_rhs(linear_data(U, V));
            Eigen::SparseMatrix<double> J = op_.matrix() - rhs_jacobian(U, V);
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
            if (lu.info() != Eigen::Success) throw SolverError("Newton Jacobian is singular");
            const Eigen::VectorXd dx = lu.solve(-r);
            double delta = 0.0;
            for (int i = 0; i <= grid_.nx; ++i)
                for (int j = 0; j <= grid_.ny; ++j) {
                    const double du = cfg.damping * dx[op_.index_u(i, j)];
                    const double dv = cfg.damping * dx[op_.index_v(i, j)];
                    U(i, j) += du;
                    V(i, j) += dv;
                    delta = std::max({delta, std::abs(du), std::abs(dv)});
                }
            rep.residual_history.push_back(delta);
            rep.iterations = k + 1;
            if (delta <= cfg.tol) {
                rep.converged = true;
                break;
            }
        }
        if (rep.converged) rep.final_nonlinear_residual = fixed_point_defect(U, V);
        return {build_state(U, V), rep};
    }

    // Nonlinear residual of the discrete system at (U,V), measured in
    // solution units: || x - PicardMap(x) ||_inf.
    double fixed_point_defect(const Field2D& U, const Field2D& V) {
        auto [Ur, Vr] = op_.solve(linear_data(U, V));
        return std::max(max_abs_diff(U, Ur), max_abs_diff(V, Vr));
    }

    SolutionState build_state(const Field2D& U, const Field2D& V) const {
        SolutionState s;
        s.form = form_;
        s.grid = grid_;
        s.U = U;
        s.V = V;
        s.primary = Field2D(grid_);
        s.Phi = Field2D(grid_);
        s.rho = Field2D(grid_);
        s.u1 = Field2D(grid_);
        s.u2 = Field2D(grid_);
        s.mach = Field2D(grid_);
        s.q1 = Field2D(grid_);
        s.q2 = Field2D(grid_);
        s.K = form_ == Formulation::potential ? bg_.K0 : bg_.k0;
        s.gamma = bg_.gamma;
        std::tie(s.lambda0, s.Lambda0) = coefs_.ellipticity_bounds();
        double margin = std::numeric_limits<double>::infinity();
        double rlo = std::numeric_limits<double>::infinity(), rhi = 0.0;
        for (int i = 0; i <= grid_.nx; ++i) {
            for (int j = 0; j <= grid_.ny; ++j) {
                const auto [z, q] = node_state(U, V, i, j);
                s.Phi(i, j) = z;
                s.q1(i, j) = q[0];
                s.q2(i, j) = q[1];
                try {
                    if (form_ == Formulation::potential) {
                        s.primary(i, j) = bg_.phi[i] + U(i, j);
                        const double rho = potential::density(law_, {z, q, bg_.K0});
                        s.rho(i, j) = rho;
                        s.u1(i, j) = q[0];
                        s.u2(i, j) = q[1];
                        s.mach(i, j) = std::sqrt(norm2(q) / law_.dp(rho));
                        margin = std::min(margin, law_.dp(rho) - norm2(q));
                        rlo = std::min(rlo, rho);
                        rhi = std::max(rhi, rho);
                    } else {
                        s.primary(i, j) = bg_.J * grid_.x2(j) + U(i, j);
                        StreamPoint pt{z, q, bg_.k0, bg_.gamma};
                        const double rho = stream::solve_density_roots(pt).rho_sub;
                        s.rho(i, j) = rho;
                        s.u1(i, j) = q[1] / rho;  // u = rot(psi)/rho
                        s.u2(i, j) = -q[0] / rho;
                        const double c2 = bg_.gamma * std::pow(rho, bg_.gamma - 1.0);
                        s.mach(i, j) = std::sqrt(norm2(q) / (rho * rho * c2));
                        margin = std::min(margin, stream::lambda_margin(pt));
                        rlo = std::min(rlo, rho);
                        rhi = std::max(rhi, rho);
                    }
                } catch (const std::exception& e) {
                    rethrow_with_node(e, i, j);
                }
            }
        }
        s.margin_min = margin;
        s.rho_min = rlo;
        s.rho_max = rhi;
        s.subsonic = margin > 0.0;
        s.rho.require_finite("rho");
        s.mach.require_finite("mach");
        return s;
    }

  private:
    [[noreturn]] void rethrow_with_node(const std::exception& e, int i, int j) const {
        const std::string where = " at node (" + std::to_string(i) + "," + std::to_string(j) +
                                  "), x = (" + std::to_string(grid_.x1(i)) + "," +
                                  std::to_string(grid_.x2(j)) + ")";
        if (dynamic_cast<const VacuumError*>(&e)) throw VacuumError(e.what() + where);
        if (dynamic_cast<const NoSubsonicRoot*>(&e)) throw NoSubsonicRoot(e.what() + where);
        if (dynamic_cast<const SonicDegeneracy*>(&e)) throw SonicDegeneracy(e.what() + where);
        throw SolverError(e.what() + where);
    }

    // d(rhs)/d(x): how the lagged remainder fields move with the iterate.
    Eigen::SparseMatrix<double> rhs_jacobian(const Field2D& U, const Field2D& V) const {
        const int N = grid_.num_nodes();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(std::size_t(N) * 30);

        // Derivatives of the nodal remainders wrt (V, qh1, qh2) at each node.
        struct NodeDeriv {
            double F1_V, F1_q1, F1_q2;
            double F2_V, F2_q1, F2_q2;
            double f_V, f_q1, f_q2;
        };
        std::vector<NodeDeriv> nd(static_cast<std::size_t>(N));
        for (int i = 0; i <= grid_.nx; ++i) {
            for (int j = 0; j <= grid_.ny; ++j) {
                const auto [z, q] = node_state(U, V, i, j);
                PointDerivs d;
                try {
                    d = eval_derivs(form_, law_, bg_, z, q);
                } catch (const std::exception& e) {
                    rethrow_with_node(e, i, j);
                }
                NodeDeriv& n = nd[std::size_t(op_.index_u(i, j))];
                n.F1_V = -(d.dA_dz[0] - coefs_.cz1[i]);
                n.F2_V = -(d.dA_dz[1] - coefs_.cz2[i]);
                n.F1_q1 = -(d.dA_dq[0][0] - coefs_.a11[i]);
                n.F1_q2 = -d.dA_dq[0][1];
                n.F2_q1 = -d.dA_dq[1][0];
                n.F2_q2 = -(d.dA_dq[1][1] - coefs_.a22[i]);
                n.f_V = d.dB_dz - coefs_.bz[i];
                n.f_q1 = d.dB_dq[0] - coefs_.bq1[i];
                n.f_q2 = d.dB_dq[1] - coefs_.bq2[i];
            }
        }

        // Emit row-dependencies through the nodal gradient stencils.
        auto add_node_dep = [&](int row, int ni, int nj, double wF_V, double wF_q1,
                                double wF_q2) {
            // weight times (dF/dV dV + dF/dq1 dq1 + dF/dq2 dq2) at node (ni,nj)
            if (wF_V != 0.0) trip.emplace_back(row, op_.index_v(ni, nj), wF_V);
            auto chain_x = [&](double w) {
                if (w == 0.0) return;
                if (ni == 0) {
                    trip.emplace_back(row, op_.index_u(0, nj), w * -3.0 / (2.0 * grid_.hx));
                    trip.emplace_back(row, op_.index_u(1, nj), w * 4.0 / (2.0 * grid_.hx));
                    trip.emplace_back(row, op_.index_u(2, nj), w * -1.0 / (2.0 * grid_.hx));
                } else if (ni == grid_.nx) {
                    trip.emplace_back(row, op_.index_u(grid_.nx, nj), w * 3.0 / (2.0 * grid_.hx));
                    trip.emplace_back(row, op_.index_u(grid_.nx - 1, nj),
                                      w * -4.0 / (2.0 * grid_.hx));
                    trip.emplace_back(row, op_.index_u(grid_.nx - 2, nj),
                                      w * 1.0 / (2.0 * grid_.hx));
                } else {
                    trip.emplace_back(row, op_.index_u(ni + 1, nj), w / (2.0 * grid_.hx));
                    trip.emplace_back(row, op_.index_u(ni - 1, nj), -w / (2.0 * grid_.hx));
                }
            };
            auto chain_y = [&](double w) {
                if (w == 0.0) return;
                if (nj == 0 || nj == grid_.ny) {
                    if (form_ == Formulation::potential) return; // reflected wall, q2 = 0
                    const int sgn = (nj == 0) ? 1 : -1;
                    const int base = (nj == 0) ? 0 : grid_.ny;
                    trip.emplace_back(row, op_.index_u(ni, base), w * sgn * -3.0 / (2.0 * grid_.hy));
                    trip.emplace_back(row, op_.index_u(ni, base + sgn * 1),
                                      w * sgn * 4.0 / (2.0 * grid_.hy));
                    trip.emplace_back(row, op_.index_u(ni, base + sgn * 2),
                                      w * sgn * -1.0 / (2.0 * grid_.hy));
                } else {
                    trip.emplace_back(row, op_.index_u(ni, nj + 1), w / (2.0 * grid_.hy));
                    trip.emplace_back(row, op_.index_u(ni, nj - 1), -w / (2.0 * grid_.hy));
                }
            };
            chain_x(wF_q1);
            chain_y(wF_q2);
        };

        for (int i = 0; i <= grid_.nx; ++i) {
            for (int j = 0; j <= grid_.ny; ++j) {
                const int ru = op_.index_u(i, j);
                const int rv = op_.index_v(i, j);
                if (!op_.dirichlet_u(i, j)) {
                    const double wx = (i == 0 || i == grid_.nx) ? 0.5 * grid_.hx : grid_.hx;
                    const double wy = (j == 0 || j == grid_.ny) ? 0.5 * grid_.hy : grid_.hy;
                    auto face_F1 = [&](int ni, double sign, double width) {
                        const NodeDeriv& n = nd[std::size_t(op_.index_u(ni, j))];
                        add_node_dep(ru, ni, j, sign * 0.5 * n.F1_V / width,
                                     sign * 0.5 * n.F1_q1 / width, sign * 0.5 * n.F1_q2 / width);
                    };
                    auto face_F2 = [&](int nj, double sign, double width) {
                        const NodeDeriv& n = nd[std::size_t(op_.index_u(i, nj))];
                        add_node_dep(ru, i, nj, sign * 0.5 * n.F2_V / width,
                                     sign * 0.5 * n.F2_q1 / width, sign * 0.5 * n.F2_q2 / width);
                    };
                    if (i < grid_.nx) { face_F1(i, +1.0, wx); face_F1(i + 1, +1.0, wx); }
                    if (i > 0) { face_F1(i - 1, -1.0, wx); face_F1(i, -1.0, wx); }
                    if (j < grid_.ny) { face_F2(j, +1.0, wy); face_F2(j + 1, +1.0, wy); }
                    if (j > 0) { face_F2(j - 1, -1.0, wy); face_F2(j, -1.0, wy); }
                }
                if (!op_.dirichlet_v(i, j)) {
                    const NodeDeriv& n = nd[std::size_t(op_.index_u(i, j))];
                    add_node_dep(rv, i, j, n.f_V, n.f_q1, n.f_q2);
                }
            }
        }

        Eigen::SparseMatrix<double> B(2 * N, 2 * N);
        B.setFromTriplets(trip.begin(), trip.end());
        return B;
    }

    Formulation form_;
    PressureLaw law_;
    NozzleGrid grid_;
    GridBackground bg_;
    DopingProfile doping_;
    OperatorCoefficients coefs_;
    EllipticOperator op_;
    std::vector<double> g0v_, h0v_, vLv_, uD0v_;
    double g0_wall_hi_ = 0.0;
};

} // namespace eplab
