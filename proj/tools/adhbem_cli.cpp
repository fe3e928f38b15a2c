// Command-line front end: benchmark runs, convergence studies, law
// tabulation and mesh dumps, all driven by one key-value config file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "adhbem/bench.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"2D boundary-element solver for adhesive contact"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    double eps_override = -1.0;
    int levels_override = 0;
    app.add_option("--config", config_path, "configuration file (key = value sections)");
    app.add_option("--eps", eps_override, "override the smoothing parameter");
    app.add_option("--levels", levels_override, "override the number of study levels");
    app.add_option("--out", out_dir, "output directory");

    auto* bench = app.add_subcommand("bench", "solve the load cases and write CSV artifacts");
    bool dump_matrices = false;
    bench->add_flag("--dump-matrices", dump_matrices, "also dump the operator matrices as text");
    auto* conv = app.add_subcommand("converge", "h-refinement study (benchmark + smooth control)");
    auto* tab = app.add_subcommand("tabulate-law", "tabulate the adhesion law and its smoothing");
    double x_min = -0.6, x_max = 0.1;
    int samples = 1401;
    tab->add_option("--x-min", x_min, "left end of the tabulation range");
    tab->add_option("--x-max", x_max, "right end of the tabulation range");
    tab->add_option("--samples", samples, "number of samples");
    auto* mdump = app.add_subcommand("mesh-dump", "write the benchmark mesh as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        adhbem::RunConfig cfg;
        if (!config_path.empty()) cfg = adhbem::load_config(config_path);
        if (eps_override > 0.0) cfg.eps = eps_override;
        if (levels_override > 0) cfg.levels = levels_override;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        fs::create_directories(cfg.out_dir);

        if (bench->parsed()) {
            adhbem::BenchmarkRun run = adhbem::run_benchmark(cfg);
            for (size_t c = 0; c < run.cases.size(); ++c) {
                const auto& cr = run.cases[c];
                std::printf("case %zu: t2 = %g N/mm^2  %s  iterations %d  merit %.3e  max|u2| %.5f mm\n", c,
                            cr.t2, cr.converged ? "converged" : "NOT CONVERGED", cr.report.iterations,
                            cr.report.merit, cr.max_abs_u2);
            }
            if (dump_matrices) {
                auto dump = [&](const Eigen::MatrixXd& m, const char* name) {
                    std::ofstream f(fs::path(cfg.out_dir) / name);
                    adhbem::dump_matrix(m, f);
                };
                dump(run.blocks.V, "matrix_V.txt");
                dump(run.blocks.K, "matrix_K.txt");
                dump(run.blocks.W, "matrix_W.txt");
                dump(run.blocks.I, "matrix_I.txt");
                dump(run.steklov.P, "matrix_P.txt");
            }
            std::printf("artifacts written to %s\n", cfg.out_dir.c_str());
            return run.all_converged ? 0 : 1;
        }

        if (conv->parsed()) {
            const adhbem::ConvergenceStudy bench_study = adhbem::run_convergence_study(cfg);
            adhbem::write_file_atomic(fs::path(cfg.out_dir) / "convergence_benchmark.csv",
                                      adhbem::study_csv(bench_study));
            const adhbem::ConvergenceStudy smooth = adhbem::run_smooth_control_study(cfg);
            adhbem::write_file_atomic(fs::path(cfg.out_dir) / "convergence_smooth.csv",
                                      adhbem::study_csv(smooth));
            std::printf("benchmark study: rate %.3f, errors %s\n", bench_study.fitted_rate,
                        bench_study.errors_decreasing ? "strictly decreasing" : "NOT decreasing");
            std::printf("smooth control:  rate %.3f\n", smooth.fitted_rate);
            if (!bench_study.complete) {
                std::printf("study aborted: a level did not converge (partial table written)\n");
                return 1;
            }
            return 0;
        }

        if (tab->parsed()) {
            const adhbem::AdhesionLaw law(cfg.law);
            std::ostringstream os;
            adhbem::tabulate_law_csv(law, cfg.eps, x_min, x_max, samples, os);
            adhbem::write_file_atomic(fs::path(cfg.out_dir) / "law.csv", os.str());
            std::printf("law tabulation written to %s/law.csv\n", cfg.out_dir.c_str());
            return 0;
        }

        if (mdump->parsed()) {
            adhbem::BoundaryMesh mesh =
                adhbem::build_rectangle_boundary(cfg.width, cfg.height, cfg.mesh_h(), cfg.parts);
            adhbem::scale_mesh_for_capacity(mesh);
            std::ostringstream os;
            adhbem::dump_mesh_csv(mesh, os);
            adhbem::write_file_atomic(fs::path(cfg.out_dir) / "mesh.csv", os.str());
            std::printf("mesh written to %s/mesh.csv (%d nodes, %d elements, scale %.6g)\n",
                        cfg.out_dir.c_str(), mesh.num_nodes(), mesh.num_elements(), mesh.scale);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
