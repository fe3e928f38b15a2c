#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "adhbem/adhesion.hpp"
#include "adhbem/assembly.hpp"
#include "adhbem/hvi.hpp"
#include "adhbem/mesh.hpp"
#include "adhbem/solver.hpp"
#include "adhbem/steklov.hpp"

namespace adhbem {

/// Benchmark/run configuration. Defaults reproduce the delamination
/// benchmark: 100 x 10 mm strip, clamped left edge, adhesive bottom edge,
/// vertical loads on the right half of the top edge.
struct RunConfig {
    double width = 100.0, height = 10.0;  // mm
    double element_size = 2.5;            // mm
    int node_budget = 0;                  // if > 0, overrides element_size
    RectanglePartSpec parts;              // bottom contact, left clamped
    double youngs = 210000.0;             // N/mm^2
    double poisson = 0.3;
    bool explicit_lame = false;
    double lambda = 0.0, mu = 0.0;
    std::vector<double> loads = {0.2, 0.4, 0.6, 0.8, 1.0};  // N/mm^2, vertical
    double load_x_min = 50.0;             // traction support: top edge, x >= this
    double eps = 0.1;
    AdhesionParams law;
    bool law_enabled = true;
    bool constraints_enabled = true;
    int levels = 3;
    TrustRegionConfig solver;
    QuadratureConfig quadrature;
    std::string out_dir = "out";

    RunConfig() { solver.merit_tolerance = 1e-24; }

    LameParameters material() const {
        return explicit_lame ? lame_explicit(lambda, mu) : lame_from_engineering(youngs, poisson);
    }
    double mesh_h() const {
        return node_budget > 0 ? element_size_from_budget(width, height, node_budget) : element_size;
    }
};

// ------------------------------------------------------------- config file

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline Part parse_part(const std::string& v) {
    if (v == "dirichlet") return Part::Dirichlet;
    if (v == "neumann") return Part::Neumann;
    if (v == "contact") return Part::Contact;
    throw std::invalid_argument("config: unknown boundary part '" + v + "'");
}

inline bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config: expected a boolean, got '" + v + "'");
}

}  // namespace detail

/// Flat-section key = value format; '#' starts a comment.
inline RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw std::invalid_argument("config: bad section header at line " + std::to_string(lineno));
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        const std::string k = section + "." + key;
        auto num = [&val, &k]() {
            try {
                size_t pos = 0;
                const double d = std::stod(val, &pos);
                if (detail::trim(val.substr(pos)).size()) throw std::invalid_argument("");
                return d;
            } catch (...) {
                throw std::invalid_argument("config: bad number for " + k + ": '" + val + "'");
            }
        };
        if (k == "geometry.width") cfg.width = num();
        else if (k == "geometry.height") cfg.height = num();
        else if (k == "geometry.element_size") cfg.element_size = num();
        else if (k == "geometry.node_budget") cfg.node_budget = static_cast<int>(num());
        else if (k == "geometry.bottom") cfg.parts.bottom = detail::parse_part(val);
        else if (k == "geometry.right") cfg.parts.right = detail::parse_part(val);
        else if (k == "geometry.top") cfg.parts.top = detail::parse_part(val);
        else if (k == "geometry.left") cfg.parts.left = detail::parse_part(val);
        else if (k == "material.E") cfg.youngs = num();
        else if (k == "material.nu") cfg.poisson = num();
        else if (k == "material.lambda") { cfg.lambda = num(); cfg.explicit_lame = true; }
        else if (k == "material.mu") { cfg.mu = num(); cfg.explicit_lame = true; }
        else if (k == "load.t2") {
            cfg.loads.clear();
            std::istringstream ls(val);
            double t;
            while (ls >> t) cfg.loads.push_back(t);
            if (cfg.loads.empty()) throw std::invalid_argument("config: load.t2 needs at least one value");
        } else if (k == "load.x_min") cfg.load_x_min = num();
        else if (k == "law.enabled") cfg.law_enabled = detail::parse_bool(val);
        else if (k == "law.constraints") cfg.constraints_enabled = detail::parse_bool(val);
        else if (k == "law.A1") cfg.law.A1 = num();
        else if (k == "law.A2") cfg.law.A2 = num();
        else if (k == "law.A3") cfg.law.A3 = num();
        else if (k == "law.A4") cfg.law.A4 = num();
        else if (k == "law.t1") cfg.law.t1 = num();
        else if (k == "law.t2") cfg.law.t2 = num();
        else if (k == "law.t3") cfg.law.t3 = num();
        else if (k == "law.t4") cfg.law.t4 = num();
        else if (k == "law.eps") cfg.eps = num();
        else if (k == "solver.max_iterations") cfg.solver.max_iterations = static_cast<int>(num());
        else if (k == "solver.merit_tolerance") cfg.solver.merit_tolerance = num();
        else if (k == "solver.gradient_tolerance") cfg.solver.gradient_tolerance = num();
        else if (k == "solver.initial_damping") cfg.solver.initial_damping = num();
        else if (k == "study.levels") cfg.levels = static_cast<int>(num());
        else if (k == "output.dir") cfg.out_dir = val;
        else throw std::invalid_argument("config: unknown key " + k);
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    return parse_config(f);
}

// ------------------------------------------------------------------ output

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// ------------------------------------------------------------------- runs

struct CaseResult {
    double t2 = 0.0;
    bool converged = false;
    SolveReport report;
    Eigen::VectorXd z;                   // (u, lambda) on free dofs
    ContactStress stress;                // along Gamma_C, physical units
    double max_abs_u2 = 0.0;
};

struct BenchmarkRun {
    BoundaryMesh mesh;                   // capacity-scaled
    OperatorBlocks blocks;
    SteklovSystem steklov;
    DualMesh dual;
    AdhesionLaw law;
    std::vector<CaseResult> cases;
    bool all_converged = true;
};

inline Eigen::VectorXd benchmark_load_vector(const BoundaryMesh& mesh, const SteklovSystem& sys,
                                             const RunConfig& cfg, double t2) {
    const double y_top = cfg.height, x_min = cfg.load_x_min;
    return assemble_neumann_load(mesh, sys, [&](const Eigen::Vector2d& x) {
        const bool on_top = std::abs(x.y() - y_top) < 1e-9 * (1.0 + y_top);
        return (on_top && x.x() >= x_min - 1e-9) ? Eigen::Vector2d(0.0, t2) : Eigen::Vector2d(0.0, 0.0);
    });
}

/// Assemble the benchmark problem on the given (physical-unit) mesh and
/// solve all load cases, warm-starting each from its linear-elastic state.
inline BenchmarkRun run_benchmark_cases(BoundaryMesh mesh, const RunConfig& cfg) {
    BenchmarkRun run;
    scale_mesh_for_capacity(mesh);
    run.mesh = std::move(mesh);
    run.blocks = assemble_operator_blocks(run.mesh, cfg.material(), cfg.quadrature);
    run.steklov = assemble_steklov(run.blocks, run.mesh);
    run.dual = build_dual_mesh(run.mesh);
    run.law = AdhesionLaw(cfg.law);

    DiscreteHVI problem = make_discrete_hvi(run.steklov, run.mesh, run.dual, run.law, cfg.eps);
    problem.law_enabled = cfg.law_enabled;
    problem.constraints_enabled = cfg.constraints_enabled;
    const ResidualSystem system{&problem};

    for (double t2 : cfg.loads) {
        CaseResult cr;
        cr.t2 = t2;
        const Eigen::VectorXd g = benchmark_load_vector(run.mesh, run.steklov, cfg, t2);
        run.steklov.load = g;
        Eigen::VectorXd z0(problem.size());
        z0.head(problem.num_dofs()) = run.steklov.chol.solve(g);
        z0.tail(problem.num_multipliers()).setZero();
        auto [z, rep] = levenberg_marquardt([&](const Eigen::VectorXd& v) { return system.residual(v); },
                                            [&](const Eigen::VectorXd& v) { return system.jacobian(v); }, z0,
                                            cfg.solver);
        cr.z = z;
        cr.report = rep;
        const double scaled_merit_gate = 1e-12 * problem.size();
        cr.converged = rep.merit <= scaled_merit_gate;
        cr.stress = recover_contact_stress(problem, z);
        for (int k = 0; k < problem.num_dofs(); ++k)
            if (run.steklov.node_of_dof[k] % 2 == 1) cr.max_abs_u2 = std::max(cr.max_abs_u2, std::abs(z[k]));
        run.cases.push_back(std::move(cr));
        run.all_converged = run.all_converged && run.cases.back().converged;
    }
    return run;
}

/// Full benchmark: solve and emit the CSV artifacts
/// (solution + plot data per case, law scatter, summary).
inline BenchmarkRun run_benchmark(const RunConfig& cfg) {
    BoundaryMesh mesh = build_rectangle_boundary(cfg.width, cfg.height, cfg.mesh_h(), cfg.parts);
    BenchmarkRun run = run_benchmark_cases(std::move(mesh), cfg);

    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const double inv = 1.0 / run.mesh.scale;
    std::string scatter = "case,t2,un_mm,minus_sigma_n_Nmm2,law_slope_Nmm2\n";
    std::string summary = "case,t2,converged,iterations,merit,max_abs_u2_mm\n";
    for (size_t c = 0; c < run.cases.size(); ++c) {
        const CaseResult& cr = run.cases[c];
        std::string sol = "node,x_mm,u1_mm,u2_mm,un_mm,sigma_n_Nmm2,lambda\n";
        std::string plot = "case,t2,x_mm,u2_mm,un_mm,sigma_n_Nmm2\n";
        for (size_t k = 0; k < cr.stress.node.size(); ++k) {
            const int i = cr.stress.node[k];
            const double x = run.mesh.vertices[i].x() * inv;
            const int d0 = run.steklov.dof_of_node[2 * i], d1 = run.steklov.dof_of_node[2 * i + 1];
            sol += std::to_string(i) + "," + fmt(x) + "," + fmt(cr.z[d0]) + "," + fmt(cr.z[d1]) + ","
                 + fmt(cr.stress.u_n[k]) + "," + fmt(cr.stress.sigma_n[k]) + "," + fmt(cr.stress.lambda[k]) + "\n";
            plot += std::to_string(c) + "," + fmt(cr.t2) + "," + fmt(x) + "," + fmt(cr.z[d1]) + ","
                  + fmt(cr.stress.u_n[k]) + "," + fmt(cr.stress.sigma_n[k]) + "\n";
            scatter += std::to_string(c) + "," + fmt(cr.t2) + "," + fmt(cr.stress.u_n[k]) + ","
                     + fmt(-cr.stress.sigma_n[k]) + ","
                     + fmt(-run.law.smoothed_slope(cfg.eps, cr.stress.u_n[k])) + "\n";
        }
        write_file_atomic(fs::path(cfg.out_dir) / ("solution_case" + std::to_string(c) + ".csv"), sol);
        write_file_atomic(fs::path(cfg.out_dir) / ("plotdata_case" + std::to_string(c) + ".csv"), plot);
        summary += std::to_string(c) + "," + fmt(cr.t2) + "," + (cr.converged ? "1" : "0") + ","
                 + std::to_string(cr.report.iterations) + "," + fmt(cr.report.merit) + ","
                 + fmt(cr.max_abs_u2) + "\n";
    }
    write_file_atomic(fs::path(cfg.out_dir) / "law_scatter.csv", scatter);
    write_file_atomic(fs::path(cfg.out_dir) / "summary.csv", summary);
    return run;
}

// ---------------------------------------------------- convergence studies

/// Prolong nodal values from a mesh to its refine_uniform child
/// (parent nodes keep indices; midpoints average their edge).
inline Eigen::VectorXd prolong_nodal(const BoundaryMesh& parent, const Eigen::VectorXd& nodal) {
    const int n = parent.num_nodes();
    Eigen::VectorXd out(2 * (n + parent.num_elements()));
    out.head(2 * n) = nodal;
    for (int e = 0; e < parent.num_elements(); ++e) {
        const int i0 = parent.elements[e][0], i1 = parent.elements[e][1];
        const int mid = n + e;
        for (int c = 0; c < 2; ++c) out[2 * mid + c] = 0.5 * (nodal[2 * i0 + c] + nodal[2 * i1 + c]);
    }
    return out;
}

struct ConvergenceLevel {
    int level = 0;
    int nodes = 0;
    double h = 0.0;
    double error = 0.0;  // energy-norm distance to the reference solution
    bool converged = true;
};

struct ConvergenceStudy {
    std::vector<ConvergenceLevel> levels;
    double fitted_rate = 0.0;
    bool errors_decreasing = false;
    bool complete = true;
};

namespace detail {

inline double fit_rate(const std::vector<ConvergenceLevel>& lv) {
    // least-squares slope of log2(error) against level index; error ~ C h^r
    // and h halves per level, so the rate is minus the slope
    const int n = static_cast<int>(lv.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = i, y = std::log2(lv[i].error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

/// Self-convergence of the benchmark solve: `levels` meshes plus one finer
/// reference; the error of each level is the reference-energy-norm distance
/// of its prolonged solution to the reference solution. Uses the last load
/// case of the config.
inline ConvergenceStudy run_convergence_study(const RunConfig& cfg) {
    if (cfg.levels < 3) throw std::invalid_argument("run_convergence_study: need at least 3 levels");
    RunConfig c1 = cfg;
    c1.loads = {cfg.loads.back()};
    ConvergenceStudy study;

    std::vector<BoundaryMesh> meshes;  // physical-unit meshes, nested
    meshes.push_back(build_rectangle_boundary(cfg.width, cfg.height, cfg.mesh_h(), cfg.parts));
    for (int l = 1; l <= cfg.levels; ++l) meshes.push_back(refine_uniform(meshes.back()));

    std::vector<Eigen::VectorXd> nodal;  // physical nodal solutions per level
    for (int l = 0; l <= cfg.levels; ++l) {
        BenchmarkRun run = run_benchmark_cases(meshes[l], c1);
        ConvergenceLevel lvl;
        lvl.level = l;
        lvl.nodes = run.mesh.num_nodes();
        lvl.h = meshes[l].element_length(0);
        lvl.converged = run.all_converged;
        if (!run.all_converged) {
            study.complete = false;
            study.levels.push_back(lvl);
            break;
        }
        nodal.push_back(run.steklov.expand_to_nodal(run.cases[0].z.head(run.steklov.size())));
        if (l < cfg.levels) study.levels.push_back(lvl);
        if (l == cfg.levels) {
            // reference level: measure all coarser levels in its energy norm
            for (int j = 0; j < cfg.levels; ++j) {
                Eigen::VectorXd pj = nodal[j];
                for (int c = j; c < cfg.levels; ++c) pj = prolong_nodal(meshes[c], pj);
                const Eigen::VectorXd diff = run.steklov.restrict_nodal(pj - nodal.back());
                study.levels[j].error = energy_norm(run.steklov, diff);
            }
        }
    }
    if (study.complete) {
        study.errors_decreasing = true;
        for (size_t i = 0; i + 1 < study.levels.size(); ++i)
            study.errors_decreasing = study.errors_decreasing && study.levels[i + 1].error < study.levels[i].error;
        study.fitted_rate = detail::fit_rate(study.levels);
    }
    return study;
}

/// Smooth control study: the same rectangle with an all-Neumann boundary,
/// loaded by the traction of the exact quadratic Navier field
/// u = (x y, -(lambda+mu)/(2 mu) x^2) (rigid modes pinned). No adhesive law;
/// measures the plain Galerkin convergence of the Steklov solve.
inline ConvergenceStudy run_smooth_control_study(const RunConfig& cfg) {
    const LameParameters mat = cfg.material();
    const double a = -(mat.lambda + mat.mu) / (2.0 * mat.mu);
    const double unit = 1.0 / std::max(cfg.width, cfg.height);  // keeps values O(size)
    auto field = [a, unit](const Eigen::Vector2d& x) {
        return Eigen::Vector2d(unit * x.x() * x.y(), unit * a * x.x() * x.x());
    };
    auto gradient = [a, unit](const Eigen::Vector2d& x) {
        Eigen::Matrix2d g;
        g << unit * x.y(), unit * x.x(), 2.0 * unit * a * x.x(), 0.0;
        return g;
    };

    RectanglePartSpec parts;
    parts.bottom = parts.right = parts.top = parts.left = Part::Neumann;
    std::vector<BoundaryMesh> meshes;
    meshes.push_back(build_rectangle_boundary(cfg.width, cfg.height, cfg.mesh_h(), parts));
    for (int l = 1; l <= cfg.levels; ++l) meshes.push_back(refine_uniform(meshes.back()));

    ConvergenceStudy study;
    std::vector<Eigen::VectorXd> nodal;
    SteklovSystem ref_sys;
    for (int l = 0; l <= cfg.levels; ++l) {
        BoundaryMesh mesh = meshes[l];
        scale_mesh_for_capacity(mesh);
        const OperatorBlocks blocks = assemble_operator_blocks(mesh, mat, cfg.quadrature);
        SteklovSystem sys = assemble_steklov(blocks, mesh);
        // load from the exact traction, integrated per element (linear in x)
        Eigen::VectorXd g = Eigen::VectorXd::Zero(sys.size());
        const GaussRule rule(4);
        const double inv = 1.0 / mesh.scale;
        for (int e = 0; e < mesh.num_elements(); ++e) {
            const int i0 = mesh.elements[e][0], i1 = mesh.elements[e][1];
            const double L = mesh.element_length(e) * inv;
            for (size_t k = 0; k < rule.x.size(); ++k) {
                const double s = 0.5 * (rule.x[k] + 1.0);
                const Eigen::Vector2d xp = inv * (mesh.vertices[i0] + s * (mesh.vertices[i1] - mesh.vertices[i0]));
                const Eigen::Vector2d t = linear_field_traction(gradient(xp), mesh.normal[e], mat);
                const double w = 0.5 * rule.w[k] * L;
                for (int c = 0; c < 2; ++c) {
                    g[sys.dof_of_node[2 * i0 + c]] += w * (1.0 - s) * t[c];
                    g[sys.dof_of_node[2 * i1 + c]] += w * s * t[c];
                }
            }
        }
        // pin node 0 (both components) and node 1 (vertical) to the exact field
        const int pins[3] = {0, 1, 3};
        Eigen::VectorXd exact(sys.size());
        for (int d = 0; d < sys.size(); ++d) {
            const int node = sys.node_of_dof[d] / 2, comp = sys.node_of_dof[d] % 2;
            exact[d] = field(inv * mesh.vertices[node])[comp];
        }
        std::vector<int> freed;
        for (int d = 0; d < sys.size(); ++d)
            if (d != pins[0] && d != pins[1] && d != pins[2]) freed.push_back(d);
        Eigen::MatrixXd Pff(freed.size(), freed.size());
        Eigen::VectorXd rhs(freed.size());
        for (size_t i = 0; i < freed.size(); ++i) {
            rhs[i] = g[freed[i]];
            for (int p : pins) rhs[i] -= sys.P(freed[i], p) * exact[p];
            for (size_t j = 0; j < freed.size(); ++j) Pff(i, j) = sys.P(freed[i], freed[j]);
        }
        const Eigen::VectorXd uf = Eigen::LLT<Eigen::MatrixXd>(Pff).solve(rhs);
        Eigen::VectorXd u(sys.size());
        for (int p : pins) u[p] = exact[p];
        for (size_t i = 0; i < freed.size(); ++i) u[freed[i]] = uf[i];

        ConvergenceLevel lvl;
        lvl.level = l;
        lvl.nodes = mesh.num_nodes();
        lvl.h = meshes[l].element_length(0);
        nodal.push_back(sys.expand_to_nodal(u));
        if (l < cfg.levels) study.levels.push_back(lvl);
        if (l == cfg.levels) {
            ref_sys = std::move(sys);
            for (int j = 0; j < cfg.levels; ++j) {
                Eigen::VectorXd pj = nodal[j];
                for (int c = j; c < cfg.levels; ++c) pj = prolong_nodal(meshes[c], pj);
                study.levels[j].error = energy_norm(ref_sys, ref_sys.restrict_nodal(pj - nodal.back()));
            }
        }
    }
    study.errors_decreasing = true;
    for (size_t i = 0; i + 1 < study.levels.size(); ++i)
        study.errors_decreasing = study.errors_decreasing && study.levels[i + 1].error < study.levels[i].error;
    study.fitted_rate = detail::fit_rate(study.levels);
    return study;
}

inline std::string study_csv(const ConvergenceStudy& s) {
    std::string out = "level,nodes,h_mm,energy_error,ratio\n";
    for (size_t i = 0; i < s.levels.size(); ++i) {
        const auto& l = s.levels[i];
        out += std::to_string(l.level) + "," + std::to_string(l.nodes) + "," + fmt(l.h) + "," + fmt(l.error)
             + "," + (i ? fmt(l.error / s.levels[i - 1].error) : std::string("")) + "\n";
    }
    out += "# fitted_rate," + fmt(s.fitted_rate) + "\n";
    return out;
}

}  // namespace adhbem
