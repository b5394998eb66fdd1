#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <filesystem>
#include <fstream>
#include <map>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "thermolap/bc.hpp"
#include "thermolap/errors.hpp"

namespace thermolap {

struct ThermalNode {
    std::string id;
    double capacity = 0.0;      // C [J/K]
    double T_initial = 293.15;  // [K]
};

struct ConductiveLink {
    std::string node_a, node_b;
    double conductance = 0.0;  // G [W/K]
};

struct SurfacePatch {
    std::string node;
    double area = 0.0;  // [m^2]
    std::string channel;
};

struct ProbeDef {
    std::string node;
    std::string name;
};

struct ThermalNetwork {
    std::vector<ThermalNode> nodes;
    std::vector<ConductiveLink> links;
    std::vector<SurfacePatch> patches;
    std::vector<ProbeDef> probes;

    int node_index(const std::string& id) const {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].id == id) return static_cast<int>(i);
        return -1;
    }
};

// Assembled linear system: symmetric conduction matrix (off-diagonals <= 0,
// zero row sums) plus per-patch Newton couplings that enter the diagonal.
class AssembledNetwork {
public:
    struct BoundPatch {
        int node;
        double area;
        int channel;  // index into channel_names
    };

    static AssembledNetwork assemble(const ThermalNetwork& net,
                                     const std::vector<std::string>& channel_names) {
        AssembledNetwork a;
        const int n = static_cast<int>(net.nodes.size());
        require(n > 0, errc::bad_config, "network has no nodes");
        a.channel_names_ = channel_names;
        a.capacity_.resize(n);
        a.T_initial_.resize(n);
        a.node_ids_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const auto& node = net.nodes[static_cast<std::size_t>(i)];
            require(node.capacity > 0.0, errc::bad_config,
                    "node '" + node.id + "' needs positive heat capacity");
            a.capacity_[i] = node.capacity;
            a.T_initial_[i] = node.T_initial;
            a.node_ids_[static_cast<std::size_t>(i)] = node.id;
        }

        std::vector<Eigen::Triplet<double>> trips;
        std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(n));
        for (const auto& l : net.links) {
            int ia = net.node_index(l.node_a), ib = net.node_index(l.node_b);
            require(ia >= 0 && ib >= 0, errc::dangling_patch,
                    "link references unknown node '" + (ia < 0 ? l.node_a : l.node_b) + "'");
            require(ia != ib, errc::bad_config, "self-link on node '" + l.node_a + "'");
            require(l.conductance > 0.0, errc::bad_config, "link conductance must be positive");
            trips.emplace_back(ia, ib, -l.conductance);
            trips.emplace_back(ib, ia, -l.conductance);
            trips.emplace_back(ia, ia, l.conductance);
            trips.emplace_back(ib, ib, l.conductance);
            adjacency[static_cast<std::size_t>(ia)].push_back(ib);
            adjacency[static_cast<std::size_t>(ib)].push_back(ia);
        }

        // connectivity over conductive links
        if (n > 1) {
            std::vector<char> seen(static_cast<std::size_t>(n), 0);
            std::queue<int> q;
            q.push(0);
            seen[0] = 1;
            int reached = 1;
            while (!q.empty()) {
                int u = q.front();
                q.pop();
                for (int v : adjacency[static_cast<std::size_t>(u)])
                    if (!seen[static_cast<std::size_t>(v)]) {
                        seen[static_cast<std::size_t>(v)] = 1;
                        ++reached;
                        q.push(v);
                    }
            }
            if (reached != n)
                for (int i = 0; i < n; ++i)
                    if (!seen[static_cast<std::size_t>(i)])
                        fail(errc::disconnected_node,
                             "node '" + net.nodes[static_cast<std::size_t>(i)].id +
                                 "' is not connected to the network");
        }

        a.conduction_.resize(n, n);
        a.conduction_.setFromTriplets(trips.begin(), trips.end());
        a.conduction_.makeCompressed();
        a.check_m_matrix();

        for (const auto& p : net.patches) {
            int node = net.node_index(p.node);
            require(node >= 0, errc::dangling_patch,
                    "patch references unknown node '" + p.node + "'");
            require(p.area > 0.0, errc::bad_config, "patch area must be positive");
            int ch = -1;
            for (std::size_t c = 0; c < channel_names.size(); ++c)
                if (channel_names[c] == p.channel) ch = static_cast<int>(c);
            require(ch >= 0, errc::dangling_patch,
                    "patch references unknown BC channel '" + p.channel + "'");
            a.patches_.push_back({node, p.area, ch});
        }
        return a;
    }

    int n_nodes() const { return static_cast<int>(capacity_.size()); }
    const Eigen::SparseMatrix<double>& conduction() const { return conduction_; }
    const Eigen::VectorXd& capacity() const { return capacity_; }
    const Eigen::VectorXd& initial_temperatures() const { return T_initial_; }
    const std::vector<BoundPatch>& patches() const { return patches_; }
    const std::vector<std::string>& node_ids() const { return node_ids_; }
    const std::vector<std::string>& channel_names() const { return channel_names_; }

    // System matrix with the Newton BC terms of the given per-channel alphas
    // on the diagonal.
    Eigen::SparseMatrix<double> system_matrix(const std::vector<double>& channel_alpha) const {
        Eigen::SparseMatrix<double> K = conduction_;
        for (const auto& p : patches_) {
            double aA = channel_alpha[static_cast<std::size_t>(p.channel)] * p.area;
            K.coeffRef(p.node, p.node) += aA;
        }
        K.makeCompressed();
        return K;
    }

    Eigen::VectorXd load_vector(const std::vector<double>& channel_alpha,
                                const std::vector<double>& channel_T) const {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n_nodes());
        for (const auto& p : patches_) {
            double aA = channel_alpha[static_cast<std::size_t>(p.channel)] * p.area;
            b[p.node] += aA * channel_T[static_cast<std::size_t>(p.channel)];
        }
        return b;
    }

private:
    void check_m_matrix() const {
        Eigen::SparseMatrix<double> Kt = conduction_.transpose();
        require((conduction_ - Kt).norm() < 1e-12, errc::bad_config,
                "conduction matrix must be symmetric");
        for (int k = 0; k < conduction_.outerSize(); ++k) {
            double row_sum = 0.0;
            for (Eigen::SparseMatrix<double>::InnerIterator it(conduction_, k); it; ++it) {
                if (it.row() != it.col())
                    require(it.value() <= 0.0, errc::bad_config,
                            "conduction off-diagonals must be non-positive");
                row_sum += it.value();
            }
            require(std::abs(row_sum) < 1e-9 * (std::abs(conduction_.coeff(k, k)) + 1.0),
                    errc::bad_config, "conduction row sums must vanish");
        }
    }

    Eigen::SparseMatrix<double> conduction_;
    Eigen::VectorXd capacity_, T_initial_;
    std::vector<BoundPatch> patches_;
    std::vector<std::string> node_ids_, channel_names_;
};

namespace detail {

// Direct sparse factorization below 1e4 nodes, diagonally preconditioned CG above.
inline Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                                 errc on_failure) {
    if (A.rows() < 10000) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
        solver.compute(A);
        if (solver.info() != Eigen::Success) fail(on_failure, "sparse factorization failed");
        Eigen::VectorXd x = solver.solve(b);
        if (solver.info() != Eigen::Success) fail(on_failure, "sparse solve failed");
        return x;
    }
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(1e-10);
    cg.compute(A);
    Eigen::VectorXd x = cg.solve(b);
    if (cg.info() != Eigen::Success) fail(on_failure, "conjugate gradient did not converge");
    return x;
}

}  // namespace detail

// Steady solve with constant BC values: (K + D) T = b. Needs at least one
// patch with positive alpha for well-posedness.
inline Eigen::VectorXd steady_solve(const AssembledNetwork& net,
                                    const std::vector<double>& channel_alpha,
                                    const std::vector<double>& channel_T) {
    bool any_bc = false;
    for (const auto& p : net.patches())
        if (channel_alpha[static_cast<std::size_t>(p.channel)] > 0.0) any_bc = true;
    if (!any_bc) fail(errc::singular_system, "steady solve needs at least one patch with alpha > 0");

    Eigen::SparseMatrix<double> K = net.system_matrix(channel_alpha);
    Eigen::VectorXd b = net.load_vector(channel_alpha, channel_T);
    Eigen::VectorXd T = detail::solve_spd(K, b, errc::singular_system);

    // energy-balance residual per node below 1e-9 of the flux scale
    double scale = std::max(b.lpNorm<Eigen::Infinity>(), 1.0);
    Eigen::VectorXd r = K * T - b;
    require(r.lpNorm<Eigen::Infinity>() < 1e-9 * scale, errc::singular_system,
            "steady residual exceeds tolerance");
    return T;
}

// One backward-Euler step: (C/dt + K + D(t+dt)) T_next = C/dt T + b(t+dt).
inline Eigen::VectorXd transient_step(const AssembledNetwork& net, const Eigen::VectorXd& T,
                                      double dt, const std::vector<double>& channel_alpha,
                                      const std::vector<double>& channel_T) {
    require(dt > 0.0, errc::bad_config, "time step must be positive");
    Eigen::SparseMatrix<double> A = net.system_matrix(channel_alpha);
    for (int i = 0; i < net.n_nodes(); ++i) A.coeffRef(i, i) += net.capacity()[i] / dt;
    Eigen::VectorXd rhs = net.load_vector(channel_alpha, channel_T);
    for (int i = 0; i < net.n_nodes(); ++i) rhs[i] += net.capacity()[i] / dt * T[i];
    return detail::solve_spd(A, rhs, errc::solver_divergence);
}

struct TransientHistory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> temperatures;          // per step
    std::vector<std::vector<double>> channel_heat_flow; // per step, per channel [W]
    std::vector<double> step_residual;                  // [W]
    double cumulative_residual = 0.0;                   // [J]
    double cumulative_throughput = 0.0;                 // [J]
};

// Implicit time stepping from t0 over n_steps of size dt; BC values are taken
// from the series at the end of each step (zero-order hold on their grid).
inline TransientHistory run_transient(const AssembledNetwork& net, const BcSet& bcs, double t0,
                                      double dt, std::size_t n_steps,
                                      const Eigen::VectorXd* T_start = nullptr) {
    const auto& names = net.channel_names();
    std::vector<const BoundaryConditionSeries*> series;
    for (const auto& name : names) {
        auto it = bcs.find(name);
        require(it != bcs.end(), errc::dangling_patch, "no BC series for channel '" + name + "'");
        series.push_back(&it->second);
    }

    TransientHistory h;
    Eigen::VectorXd T = T_start != nullptr ? *T_start : net.initial_temperatures();
    h.times.push_back(t0);
    h.temperatures.push_back(T);

    std::vector<double> alpha(names.size()), Teff(names.size());
    for (std::size_t s = 1; s <= n_steps; ++s) {
        double t_next = t0 + static_cast<double>(s) * dt;
        for (std::size_t c = 0; c < names.size(); ++c) {
            alpha[c] = series[c]->alpha_at(t_next);
            Teff[c] = series[c]->T_eff_at(t_next);
        }
        Eigen::VectorXd T_next = transient_step(net, T, dt, alpha, Teff);

        // bookkeeping: patch heat flows at the implicit state
        std::vector<double> qch(names.size(), 0.0);
        double q_total = 0.0;
        for (const auto& p : net.patches()) {
            double q = alpha[static_cast<std::size_t>(p.channel)] * p.area *
                       (Teff[static_cast<std::size_t>(p.channel)] - T_next[p.node]);
            qch[static_cast<std::size_t>(p.channel)] += q;
            q_total += q;
        }
        double storage_rate = 0.0, throughput = 0.0;
        for (int i = 0; i < net.n_nodes(); ++i)
            storage_rate += net.capacity()[i] * (T_next[i] - T[i]) / dt;
        for (double q : qch) throughput += std::abs(q);

        h.step_residual.push_back(q_total - storage_rate);
        h.cumulative_residual += std::abs(q_total - storage_rate) * dt;
        h.cumulative_throughput += throughput * dt;
        h.channel_heat_flow.push_back(std::move(qch));
        h.times.push_back(t_next);
        h.temperatures.push_back(T_next);
        T = std::move(T_next);
    }
    return h;
}

// --- network file ------------------------------------------------------------
// Line based:  node <id> C=<J/K> T0=<K>
//              link <idA> <idB> G=<W/K>
//              patch <node> area=<m2> channel=<zone>
//              probe <node> name=<label>

inline ThermalNetwork load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io_failure, "cannot open " + path.string());
    ThermalNetwork net;
    std::string line;
    std::size_t line_no = 0;
    auto value_of = [&](const std::string& tok, const char* key) {
        std::string prefix = std::string(key) + "=";
        require(tok.rfind(prefix, 0) == 0, errc::bad_config,
                "expected '" + prefix + "...' at line " + std::to_string(line_no));
        return tok.substr(prefix.size());
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream is(line);
        std::string kind;
        if (!(is >> kind) || kind.empty() || kind[0] == '#') continue;
        if (kind == "node") {
            ThermalNode n;
            std::string c, t0;
            require(static_cast<bool>(is >> n.id >> c >> t0), errc::bad_config,
                    "malformed node at line " + std::to_string(line_no));
            n.capacity = std::stod(value_of(c, "C"));
            n.T_initial = std::stod(value_of(t0, "T0"));
            net.nodes.push_back(n);
        } else if (kind == "link") {
            ConductiveLink l;
            std::string g;
            require(static_cast<bool>(is >> l.node_a >> l.node_b >> g), errc::bad_config,
                    "malformed link at line " + std::to_string(line_no));
            l.conductance = std::stod(value_of(g, "G"));
            net.links.push_back(l);
        } else if (kind == "patch") {
            SurfacePatch p;
            std::string a, ch;
            require(static_cast<bool>(is >> p.node >> a >> ch), errc::bad_config,
                    "malformed patch at line " + std::to_string(line_no));
            p.area = std::stod(value_of(a, "area"));
            p.channel = value_of(ch, "channel");
            net.patches.push_back(p);
        } else if (kind == "probe") {
            ProbeDef p;
            std::string name;
            require(static_cast<bool>(is >> p.node >> name), errc::bad_config,
                    "malformed probe at line " + std::to_string(line_no));
            p.name = value_of(name, "name");
            net.probes.push_back(p);
        } else {
            fail(errc::bad_config, "unknown record '" + kind + "' at line " + std::to_string(line_no));
        }
    }
    require(!net.nodes.empty(), errc::bad_config, "network file has no nodes: " + path.string());
    return net;
}

inline void save_network(const std::filesystem::path& path, const ThermalNetwork& net) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(errc::io_failure, "cannot write " + path.string());
    char buf[128];
    for (const auto& n : net.nodes) {
        std::snprintf(buf, sizeof buf, "node %s C=%.17g T0=%.17g\n", n.id.c_str(), n.capacity,
                      n.T_initial);
        out << buf;
    }
    for (const auto& l : net.links) {
        std::snprintf(buf, sizeof buf, "link %s %s G=%.17g\n", l.node_a.c_str(), l.node_b.c_str(),
                      l.conductance);
        out << buf;
    }
    for (const auto& p : net.patches) {
        std::snprintf(buf, sizeof buf, "patch %s area=%.17g channel=%s\n", p.node.c_str(), p.area,
                      p.channel.c_str());
        out << buf;
    }
    for (const auto& p : net.probes) out << "probe " << p.node << " name=" << p.name << "\n";
}

}  // namespace thermolap
