#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "adhbem/bench.hpp"

using namespace adhbem;
namespace fs = std::filesystem;

TEST_CASE("config defaults reproduce the benchmark setup") {
    const RunConfig cfg;
    CHECK(cfg.width == 100.0);
    CHECK(cfg.height == 10.0);
    CHECK(cfg.mesh_h() == 2.5);
    CHECK(cfg.loads == std::vector<double>{0.2, 0.4, 0.6, 0.8, 1.0});
    CHECK(cfg.eps == 0.1);
    const LameParameters m = cfg.material();
    CHECK(m.lambda == Catch::Approx(210000.0 * 0.3 / 0.91));
    CHECK(m.mu == Catch::Approx(210000.0 / 1.3));
}

TEST_CASE("config parser: sections, overrides, errors") {
    std::istringstream in(R"(
# comment
[geometry]
width = 40
height = 8
element_size = 2
top = neumann

[material]
E = 1000
nu = 0.25

[load]
t2 = 0.1 0.3
x_min = 20

[law]
eps = 0.05
enabled = true

[solver]
max_iterations = 33

[output]
dir = custom_out
)");
    const RunConfig cfg = parse_config(in);
    CHECK(cfg.width == 40.0);
    CHECK(cfg.height == 8.0);
    CHECK(cfg.element_size == 2.0);
    CHECK(cfg.youngs == 1000.0);
    CHECK(cfg.poisson == 0.25);
    CHECK(cfg.loads == std::vector<double>{0.1, 0.3});
    CHECK(cfg.load_x_min == 20.0);
    CHECK(cfg.eps == 0.05);
    CHECK(cfg.solver.max_iterations == 33);
    CHECK(cfg.out_dir == "custom_out");

    std::istringstream bad1("[geometry]\nwidth = ten\n");
    CHECK_THROWS_AS(parse_config(bad1), std::invalid_argument);
    std::istringstream bad2("[geometry]\nbottom = slippery\n");
    CHECK_THROWS_AS(parse_config(bad2), std::invalid_argument);
    std::istringstream bad3("[nosuch]\nkey = 1\n");
    CHECK_THROWS_AS(parse_config(bad3), std::invalid_argument);
}

namespace {

RunConfig small_config(const std::string& out) {
    RunConfig cfg;
    cfg.element_size = 5.0;  // 44 elements: fast
    cfg.loads = {0.0, 0.5, 1.0};
    cfg.out_dir = out;
    return cfg;
}

}  // namespace

TEST_CASE("benchmark run: artifacts, monotonicity, reproducibility") {
    const fs::path dir = fs::temp_directory_path() / "adhbem_test_bench";
    fs::remove_all(dir);
    const RunConfig cfg = small_config(dir.string());
    const BenchmarkRun run = run_benchmark(cfg);
    REQUIRE(run.cases.size() == 3);
    for (const auto& cr : run.cases) CHECK(cr.converged);

    // zero load: zero solution
    CHECK(run.cases[0].max_abs_u2 < 1e-12);
    // monotone peak deflection
    CHECK(run.cases[1].max_abs_u2 <= run.cases[2].max_abs_u2);

    for (int c = 0; c < 3; ++c) {
        CHECK(fs::exists(dir / ("solution_case" + std::to_string(c) + ".csv")));
        CHECK(fs::exists(dir / ("plotdata_case" + std::to_string(c) + ".csv")));
    }
    CHECK(fs::exists(dir / "law_scatter.csv"));
    CHECK(fs::exists(dir / "summary.csv"));

    {
        std::ifstream f(dir / "plotdata_case1.csv");
        std::string header;
        std::getline(f, header);
        CHECK(header == "case,t2,x_mm,u2_mm,un_mm,sigma_n_Nmm2");
    }

    // byte-identical on rerun
    std::stringstream first;
    first << std::ifstream(dir / "solution_case2.csv").rdbuf();
    run_benchmark(cfg);
    std::stringstream second;
    second << std::ifstream(dir / "solution_case2.csv").rdbuf();
    CHECK(first.str() == second.str());
    fs::remove_all(dir);
}

TEST_CASE("law scatter points sit on the smoothed law at lambda ~ 0 nodes") {
    RunConfig cfg = small_config((fs::temp_directory_path() / "adhbem_test_scatter").string());
    cfg.loads = {1.0};
    BoundaryMesh mesh = build_rectangle_boundary(cfg.width, cfg.height, cfg.mesh_h(), cfg.parts);
    const BenchmarkRun run = run_benchmark_cases(std::move(mesh), cfg);
    const auto& cr = run.cases[0];
    REQUIRE(cr.converged);
    for (size_t k = 0; k < cr.stress.node.size(); ++k) {
        if (std::abs(cr.stress.lambda[k]) > 1e-8) continue;
        const double law_sigma = run.law.smoothed_slope(cfg.eps, cr.stress.u_n[k]);
        CHECK(std::abs(cr.stress.sigma_n[k] - law_sigma) < 1e-3);
    }
}

TEST_CASE("convergence studies: decreasing errors, rates") {
    RunConfig cfg;
    cfg.element_size = 10.0;  // coarse base keeps the study quick
    cfg.levels = 3;
    cfg.loads = {1.0};
    const ConvergenceStudy bench_study = run_convergence_study(cfg);
    REQUIRE(bench_study.complete);
    REQUIRE(bench_study.levels.size() == 3);
    CHECK(bench_study.errors_decreasing);
    CHECK(bench_study.fitted_rate > 0.15);

    const ConvergenceStudy smooth = run_smooth_control_study(cfg);
    CHECK(smooth.errors_decreasing);
    CHECK(smooth.fitted_rate >= 0.9);

    const std::string csv = study_csv(bench_study);
    CHECK(csv.starts_with("level,nodes,h_mm,energy_error,ratio\n"));
    CHECK(csv.find("fitted_rate") != std::string::npos);

    RunConfig bad = cfg;
    bad.levels = 2;
    CHECK_THROWS_AS(run_convergence_study(bad), std::invalid_argument);
}

TEST_CASE("atomic write replaces the file completely") {
    const fs::path dir = fs::temp_directory_path() / "adhbem_test_atomic";
    fs::create_directories(dir);
    write_file_atomic(dir / "x.csv", "a\n");
    write_file_atomic(dir / "x.csv", "b\n");
    std::stringstream ss;
    ss << std::ifstream(dir / "x.csv").rdbuf();
    CHECK(ss.str() == "b\n");
    CHECK(!fs::exists(dir / "x.csv.tmp"));
    fs::remove_all(dir);
}

TEST_CASE("scaling covariance: two capacity radii, same physical solution") {
    RunConfig cfg;
    cfg.element_size = 5.0;
    cfg.loads = {1.0};
    Eigen::VectorXd sols[2];
    double scales[2];
    int idx = 0;
    for (double radius : {0.45, 0.18}) {
        BoundaryMesh mesh = build_rectangle_boundary(cfg.width, cfg.height, cfg.mesh_h(), cfg.parts);
        scale_mesh_for_capacity(mesh, radius);
        scales[idx] = mesh.scale;
        const OperatorBlocks blocks = assemble_operator_blocks(mesh, cfg.material(), cfg.quadrature);
        SteklovSystem sys = assemble_steklov(blocks, mesh);
        sys.load = benchmark_load_vector(mesh, sys, cfg, cfg.loads[0]);
        const DualMesh dual = build_dual_mesh(mesh);
        const AdhesionLaw law(cfg.law);
        const DiscreteHVI problem = make_discrete_hvi(sys, mesh, dual, law, cfg.eps);
        const ResidualSystem system{&problem};
        Eigen::VectorXd z0(problem.size());
        z0.head(problem.num_dofs()) = sys.chol.solve(sys.load);
        z0.tail(problem.num_multipliers()).setZero();
        auto [z, rep] = levenberg_marquardt([&](const Eigen::VectorXd& v) { return system.residual(v); },
                                            [&](const Eigen::VectorXd& v) { return system.jacobian(v); }, z0,
                                            cfg.solver);
        REQUIRE(rep.merit < 1e-18 * problem.size());
        sols[idx++] = z.head(problem.num_dofs());
    }
    REQUIRE(scales[0] != scales[1]);
    // agreement is limited by the quadrature consistency of the two
    // assemblies, not by the solver tolerance
    CHECK((sols[0] - sols[1]).cwiseAbs().maxCoeff() < 1e-6 * sols[0].cwiseAbs().maxCoeff());
}

TEST_CASE("lumped adhesive term coercivity diagnostic") {
    // <DJ(u), u> >= -C ||u|| on random samples; the fitted C stays bounded
    RunConfig cfg;
    cfg.element_size = 5.0;
    BoundaryMesh mesh = build_rectangle_boundary(cfg.width, cfg.height, cfg.mesh_h(), cfg.parts);
    scale_mesh_for_capacity(mesh);
    const OperatorBlocks blocks = assemble_operator_blocks(mesh, cfg.material(), cfg.quadrature);
    const SteklovSystem sys = assemble_steklov(blocks, mesh);
    const DualMesh dual = build_dual_mesh(mesh);
    const AdhesionLaw law;
    const DiscreteHVI problem = make_discrete_hvi(sys, mesh, dual, law, cfg.eps);
    std::mt19937 rng(9);
    std::normal_distribution<double> N;
    double fitted_c = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd u(problem.num_dofs());
        for (int i = 0; i < u.size(); ++i) u[i] = 0.3 * N(rng);
        Eigen::VectorXd dj;
        assemble_dj(problem, u, dj);
        fitted_c = std::max(fitted_c, -dj.dot(u) / u.norm());
    }
    INFO("fitted coercivity constant C = " << fitted_c);
    // |S_x| <= max slope 0.5 and sum|K_i| = |Gamma_C|, so C <= 0.5 |Gamma_C|
    CHECK(fitted_c <= 0.5 * 100.0);
}

TEST_CASE("weak form is mesh-independent up to O(h)") {
    RunConfig cfg;
    cfg.element_size = 5.0;
    cfg.loads = {1.0};
    BoundaryMesh coarse = build_rectangle_boundary(cfg.width, cfg.height, cfg.mesh_h(), cfg.parts);
    BoundaryMesh fine = refine_uniform(coarse);
    double values[2];
    std::mt19937 rng(21);
    std::normal_distribution<double> N;
    Eigen::VectorXd u_nodal(2 * coarse.num_nodes()), v_nodal(2 * coarse.num_nodes());
    for (int i = 0; i < u_nodal.size(); ++i) {
        u_nodal[i] = 0.05 * N(rng);
        v_nodal[i] = 0.05 * N(rng);
    }
    const Eigen::VectorXd u_fine = prolong_nodal(coarse, u_nodal);
    const Eigen::VectorXd v_fine = prolong_nodal(coarse, v_nodal);
    int idx = 0;
    for (BoundaryMesh* m : {&coarse, &fine}) {
        scale_mesh_for_capacity(*m);
        const OperatorBlocks blocks = assemble_operator_blocks(*m, cfg.material(), cfg.quadrature);
        SteklovSystem sys = assemble_steklov(blocks, *m);
        sys.load = benchmark_load_vector(*m, sys, cfg, cfg.loads[0]);
        const DualMesh dual = build_dual_mesh(*m);
        const AdhesionLaw law;
        const DiscreteHVI problem = make_discrete_hvi(sys, *m, dual, law, cfg.eps);
        const ResidualSystem system{&problem};
        const Eigen::VectorXd& un = idx == 0 ? u_nodal : u_fine;
        const Eigen::VectorXd& vn = idx == 0 ? v_nodal : v_fine;
        Eigen::VectorXd z = Eigen::VectorXd::Zero(problem.size());
        z.head(problem.num_dofs()) = sys.restrict_nodal(un);
        const Eigen::VectorXd F = system.residual(z);
        values[idx++] = F.head(problem.num_dofs()).dot(sys.restrict_nodal(vn));
    }
    const double h_rel = cfg.element_size / cfg.width;
    CHECK(std::abs(values[1] - values[0]) <= 10.0 * h_rel * std::abs(values[0]));
}
