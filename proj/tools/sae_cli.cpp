#include "sae/sae.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using nlohmann::ordered_json;

namespace {

struct RunConfig {
    std::string command;
    int n = 21;
    std::string bc = "dirichlet";
    std::string alpha_text = "0";
    double alpha = 0.0;
    std::string bc_file;
    double lambda1 = 1.0, lambda2 = -1.0;
    int k = 6;
    std::string output;
    std::string format = "csv";
    int grid = 101;
    int jobs = 1;
    std::string n_list_text;
    std::vector<int> n_list;
    std::string alpha_start_text = "-0.9pi", alpha_stop_text = "0.9pi";
    double alpha_start = 0, alpha_stop = 0;
    int alpha_steps = 19;
    std::string convention = "row";
    bool timing = false;
    std::string dump_mesh, dump_basis, eigenfunctions;
    int dense_threshold = sae::SolverOptions{}.dense_threshold;
};

double parse_number(const std::string& s, const std::string& what)
{
    double v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (b != e && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw sae::ConfigError(what + ": cannot parse '" + s + "' as a number");
    return v;
}

// Accepts raw radians or multiples of pi: "0.9pi", "-pi", "0.25*pi".
double parse_angle(std::string s, const std::string& what)
{
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
        s.resize(s.size() - 2);
        if (!s.empty() && s.back() == '*') s.pop_back();
        if (s.empty() || s == "+") return sae::pi;
        if (s == "-") return -sae::pi;
        return parse_number(s, what) * sae::pi;
    }
    return parse_number(s, what);
}

std::vector<int> parse_n_list(const std::string& s)
{
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        int v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) throw sae::ConfigError("--n-list: cannot parse '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

void check_n(int n, const char* flag)
{
    if (n < 5 || n % 2 == 0) throw sae::ConfigError(std::string(flag) + " must be an odd integer >= 5 (got " + std::to_string(n) + ")");
}

sae::NormalConvention convention_of(const RunConfig& c)
{
    return c.convention == "outward" ? sae::NormalConvention::outward : sae::NormalConvention::row_derivative;
}

void validate(RunConfig& c)
{
    if (!c.bc_file.empty()) c.bc = "file";
    const auto& names = sae::bc_names();
    if (std::find(names.begin(), names.end(), c.bc) == names.end())
        throw sae::ConfigError("--bc must be one of dirichlet|neumann|robin|periodic|quasiperiodic|piecewise-robin (got '" + c.bc + "')");
    if (c.bc == "file" && c.bc_file.empty()) throw sae::ConfigError("--bc file requires --bc-file PATH");
    c.alpha = parse_angle(c.alpha_text, "--alpha");
    if (c.k < 1) throw sae::ConfigError("--k must be >= 1");
    if (c.grid < 2) throw sae::ConfigError("--grid must be >= 2");
    if (c.jobs < 1) throw sae::ConfigError("--jobs must be >= 1");
    if (c.format != "csv" && c.format != "json") throw sae::ConfigError("--format must be csv or json");
    if (c.convention != "row" && c.convention != "outward") throw sae::ConfigError("--normal-convention must be row or outward");
    if (c.command == "convergence") {
        if (c.n_list_text.empty()) throw sae::ConfigError("convergence needs --n-list, e.g. --n-list 21,31,41,51");
        c.n_list = parse_n_list(c.n_list_text);
        if (c.n_list.size() < 2) throw sae::ConfigError("--n-list needs at least two sizes to fit a slope");
        for (int n : c.n_list) check_n(n, "--n-list entries");
        if (!sae::has_reference(c.bc))
            throw sae::ConfigError("no analytic reference for '" + c.bc + "'; use sweep instead");
    } else {
        check_n(c.n, "--n");
    }
    if (c.command == "sweep") {
        if (c.bc != "robin" && c.bc != "quasiperiodic") throw sae::ConfigError("sweep needs --bc robin or --bc quasiperiodic");
        c.alpha_start = parse_angle(c.alpha_start_text, "--alpha-start");
        c.alpha_stop = parse_angle(c.alpha_stop_text, "--alpha-stop");
        if (c.alpha_steps < 1) throw sae::ConfigError("--alpha-steps must be >= 1");
    }
    if (c.command == "compare-natural" && c.bc != "piecewise-robin")
        throw sae::ConfigError("compare-natural works with --bc piecewise-robin");
}

sae::BCSpec bc_spec(const RunConfig& c, double alpha)
{
    sae::BCSpec s;
    s.name = c.bc;
    s.alpha = alpha;
    s.lambda_lower = c.lambda1;
    s.lambda_upper = c.lambda2;
    s.file = c.bc_file;
    return s;
}

sae::BasisOptions basis_options(const RunConfig& c)
{
    sae::BasisOptions o;
    o.convention = convention_of(c);
    return o;
}

sae::SolverOptions solver_options(const RunConfig& c)
{
    sae::SolverOptions o;
    o.dense_threshold = c.dense_threshold;
    return o;
}

ordered_json config_json(const RunConfig& c)
{
    ordered_json j;
    j["command"] = c.command;
    j["bc"] = c.bc;
    if (c.command == "convergence")
        j["n_list"] = c.n_list;
    else
        j["n"] = c.n;
    if ((c.bc == "robin" || c.bc == "quasiperiodic") && c.command != "sweep") j["alpha"] = c.alpha;
    if (c.bc == "file") j["bc_file"] = c.bc_file;
    if (c.bc == "piecewise-robin") {
        j["lambda1"] = c.lambda1;
        j["lambda2"] = c.lambda2;
    }
    if (c.command == "sweep") {
        j["alpha_start"] = c.alpha_start;
        j["alpha_stop"] = c.alpha_stop;
        j["alpha_steps"] = c.alpha_steps;
    }
    j["k"] = c.k;
    j["grid"] = c.grid;
    j["normal_convention"] = c.convention;
    j["format"] = c.format;
    j["dense_threshold"] = c.dense_threshold;
    return j;
}

// A table: column names plus rows of cells that are numbers, integers or empty.
struct Cell {
    enum Kind { Real, Int, Empty } kind = Empty;
    double r = 0;
    long i = 0;
};
Cell real(double v) { return {Cell::Real, v, 0}; }
Cell integer(long v) { return {Cell::Int, 0, v}; }
Cell empty() { return {}; }

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string cell_text(const Cell& c)
{
    switch (c.kind) {
        case Cell::Real: return sae::format_double(c.r);
        case Cell::Int: return std::to_string(c.i);
        default: return "";
    }
}

ordered_json cell_json(const Cell& c)
{
    switch (c.kind) {
        case Cell::Real: return std::isfinite(c.r) ? ordered_json(c.r) : ordered_json(nullptr);
        case Cell::Int: return c.i;
        default: return nullptr;
    }
}

std::string render(const RunConfig& c, const ordered_json& meta, const Table& t)
{
    std::ostringstream os;
    if (c.format == "csv") {
        os << "# config: " << config_json(c).dump() << '\n';
        for (auto& [k, v] : meta.items()) os << "# " << k << ": " << v.dump() << '\n';
        for (size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
        os << '\n';
        for (auto& r : t.rows) {
            for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell_text(r[i]);
            os << '\n';
        }
    } else {
        ordered_json j;
        j["config"] = config_json(c);
        j["metadata"] = meta;
        ordered_json rows = ordered_json::array();
        for (auto& r : t.rows) {
            ordered_json o;
            for (size_t i = 0; i < r.size(); ++i) o[t.columns[i]] = cell_json(r[i]);
            rows.push_back(o);
        }
        j["rows"] = rows;
        os << j.dump(2) << '\n';
    }
    return os.str();
}

void emit(const RunConfig& c, const std::string& text)
{
    if (c.output.empty() || c.output == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw sae::ConfigError("cannot write --output " + c.output);
    f << text;
}

ordered_json run_metadata(const sae::RunResult& r)
{
    ordered_json m;
    m["n"] = r.mesh.n;
    m["N"] = r.system.N;
    m["r"] = r.basis.rank_r;
    m["compatibility_residual"] = r.basis.compatibility_residual;
    m["bc_residual"] = r.basis.bc_residual;
    m["hermitian_defect"] = r.system.hermitian_defect;
    m["solver_path"] = r.solution.path;
    return m;
}

void append_spectrum(Table& t, const sae::SpectralSolution& s, const std::vector<Cell>& prefix = {})
{
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        std::vector<Cell> row = prefix;
        row.push_back(integer(i + 1));
        row.push_back(real(s.eigenvalues[i]));
        row.push_back(integer(s.degenerate_with_previous[i]));
        row.push_back(real(s.residuals[i]));
        t.rows.push_back(std::move(row));
    }
}

void write_eigenfunctions(const RunConfig& c, const sae::RunResult& r)
{
    namespace fs = std::filesystem;
    fs::create_directories(c.eigenfunctions);
    for (Eigen::Index i = 0; i < r.solution.eigenvalues.size(); ++i) {
        auto g = sae::evaluate_eigenfunction(r.solution, r.mesh, r.basis, static_cast<int>(i), c.grid);
        std::ofstream f(fs::path(c.eigenfunctions) / ("eigenfunction_" + std::to_string(i + 1) + ".csv"));
        if (!f) throw sae::ConfigError("cannot write into " + c.eigenfunctions);
        f << "x,y,re,im\n";
        for (int a = 0; a < g.m; ++a)
            for (int b = 0; b < g.m; ++b)
                f << sae::format_double(double(a) / (g.m - 1)) << ',' << sae::format_double(double(b) / (g.m - 1)) << ','
                  << sae::format_double(g.values(a, b).real()) << ',' << sae::format_double(g.values(a, b).imag()) << '\n';
    }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Runs f(i) for i in [0, count) on up to `jobs` threads; results land by index.
template <class F>
void parallel_for(int count, int jobs, F f)
{
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto worker = [&] {
        for (int i; (i = next++) < count;) {
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < std::min(jobs, count); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

void cmd_solve(const RunConfig& c)
{
    auto t0 = Clock::now();
    auto r = sae::run_unitary(c.n, bc_spec(c, c.alpha), c.k, basis_options(c), solver_options(c));
    if (!c.dump_mesh.empty()) {
        std::ofstream f(c.dump_mesh);
        if (!f) throw sae::ConfigError("cannot write --dump-mesh " + c.dump_mesh);
        f << sae::mesh_to_json(r.mesh).dump(1) << '\n';
    }
    if (!c.dump_basis.empty()) sae::write_basis_csv(r.mesh, r.basis, c.dump_basis);
    if (!c.eigenfunctions.empty()) write_eigenfunctions(c, r);
    Table t{{"index", "eigenvalue", "degeneracy_flag", "residual"}, {}};
    append_spectrum(t, r.solution);
    auto meta = run_metadata(r);
    if (c.timing) meta["wall_time_s"] = seconds_since(t0);
    emit(c, render(c, meta, t));
}

void cmd_sweep(const RunConfig& c)
{
    auto t0 = Clock::now();
    std::vector<double> alphas(c.alpha_steps);
    for (int i = 0; i < c.alpha_steps; ++i)
        alphas[i] = c.alpha_steps == 1 ? c.alpha_start : c.alpha_start + (c.alpha_stop - c.alpha_start) * i / (c.alpha_steps - 1);
    std::vector<sae::RunResult> res(alphas.size());
    parallel_for(static_cast<int>(alphas.size()), c.jobs,
                 [&](int i) { res[i] = sae::run_unitary(c.n, bc_spec(c, alphas[i]), c.k, basis_options(c), solver_options(c)); });
    Table t{{"alpha", "index", "eigenvalue", "degeneracy_flag", "residual"}, {}};
    double max_bc = 0, max_compat = 0;
    for (size_t i = 0; i < res.size(); ++i) {
        append_spectrum(t, res[i].solution, {real(alphas[i])});
        max_bc = std::max(max_bc, res[i].basis.bc_residual);
        max_compat = std::max(max_compat, res[i].basis.compatibility_residual);
    }
    ordered_json meta;
    meta["n"] = c.n;
    meta["N"] = res.front().system.N;
    meta["r"] = res.front().basis.rank_r;
    meta["compatibility_residual"] = max_compat;
    meta["bc_residual"] = max_bc;
    if (c.timing) meta["wall_time_s"] = seconds_since(t0);
    emit(c, render(c, meta, t));
}

void cmd_convergence(const RunConfig& c)
{
    auto t0 = Clock::now();
    const int K = c.k;
    const auto exact = sae::exact_eigenvalues(c.bc, c.alpha, K);
    const auto ground = sae::exact_ground_state(c.bc, c.alpha);
    const auto ref = sae::sample_function(c.grid, ground);
    struct Row {
        sae::RunResult r;
        double l2 = 0, energy = 0;
    };
    std::vector<Row> res(c.n_list.size());
    parallel_for(static_cast<int>(res.size()), c.jobs, [&](int i) {
        res[i].r = sae::run_unitary(c.n_list[i], bc_spec(c, c.alpha), K, basis_options(c), solver_options(c));
        auto g = sae::evaluate_eigenfunction(res[i].r.solution, res[i].r.mesh, res[i].r.basis, 0, c.grid);
        res[i].l2 = sae::l2_error(g, ref);
        const double lam_h = res[i].r.solution.eigenvalues[0], lam = exact[0];
        res[i].energy = std::sqrt(std::max(0.0, lam_h - lam + lam * res[i].l2 * res[i].l2));
    });
    Table t{{"n", "index", "eigenvalue", "exact", "abs_error", "l2_error", "energy_error"}, {}};
    std::vector<double> ns, l2s, ens, lam_err;
    double max_bc = 0, max_compat = 0;
    for (size_t i = 0; i < res.size(); ++i) {
        const auto& s = res[i].r.solution;
        for (int q = 0; q < K; ++q)
            t.rows.push_back({integer(c.n_list[i]), integer(q + 1), real(s.eigenvalues[q]), real(exact[q]),
                              real(std::abs(s.eigenvalues[q] - exact[q])), q == 0 ? real(res[i].l2) : empty(),
                              q == 0 ? real(res[i].energy) : empty()});
        ns.push_back(c.n_list[i]);
        l2s.push_back(res[i].l2);
        ens.push_back(res[i].energy);
        lam_err.push_back(std::abs(s.eigenvalues[0] - exact[0]));
        max_bc = std::max(max_bc, res[i].r.basis.bc_residual);
        max_compat = std::max(max_compat, res[i].r.basis.compatibility_residual);
    }
    ordered_json meta;
    meta["compatibility_residual"] = max_compat;
    meta["bc_residual"] = max_bc;
    meta["l2_slope"] = sae::loglog_slope(ns, l2s);
    meta["energy_slope"] = sae::loglog_slope(ns, ens);
    bool positive = std::all_of(lam_err.begin(), lam_err.end(), [](double e) { return e > 0; });
    meta["eigenvalue_slope"] = positive ? ordered_json(sae::loglog_slope(ns, lam_err)) : ordered_json(nullptr);
    if (c.timing) meta["wall_time_s"] = seconds_since(t0);
    emit(c, render(c, meta, t));
}

void cmd_compare_natural(const RunConfig& c)
{
    auto t0 = Clock::now();
    auto u = sae::run_unitary(c.n, bc_spec(c, 0.0), c.k, basis_options(c), solver_options(c));
    auto nat = sae::run_natural(c.n, sae::half_split_node_lambdas(c.n, c.lambda1, c.lambda2), c.k, solver_options(c));
    Table t{{"index", "unitary", "natural", "difference"}, {}};
    for (int q = 0; q < c.k; ++q) {
        double a = u.solution.eigenvalues[q], b = nat.solution.eigenvalues[q];
        t.rows.push_back({integer(q + 1), real(a), real(b), real(a - b)});
    }
    ordered_json meta;
    meta["n"] = c.n;
    meta["N_unitary"] = u.system.N;
    meta["N_natural"] = nat.system.N;
    meta["r"] = u.basis.rank_r;
    meta["compatibility_residual"] = u.basis.compatibility_residual;
    meta["bc_residual"] = u.basis.bc_residual;
    if (c.timing) meta["wall_time_s"] = seconds_since(t0);
    emit(c, render(c, meta, t));
}

void cmd_export(const RunConfig& c)
{
    if (c.output.empty() || c.output == "-") throw sae::ConfigError("export-matrices needs --output PREFIX");
    auto m = sae::build_mesh(c.n);
    auto U = sae::make_unitary(bc_spec(c, c.alpha), m);
    auto basis = sae::build_boundary_basis(m, U, basis_options(c));
    auto sys = sae::assemble(m, basis);
    sae::write_matrix_market(sys.M, c.output + "_M.mtx");
    sae::write_matrix_market(sys.B, c.output + "_B.mtx");
    sae::write_matrix_market(sys.F, c.output + "_F.mtx");
    sae::write_matrix_market(basis.T, c.output + "_T.mtx");
    ordered_json j;
    j["config"] = config_json(c);
    j["metadata"] = {{"n", c.n}, {"N", sys.N}, {"r", basis.rank_r}, {"compatibility_residual", basis.compatibility_residual},
                     {"bc_residual", basis.bc_residual}, {"hermitian_defect", sys.hermitian_defect}};
    j["files"] = {c.output + "_M.mtx", c.output + "_B.mtx", c.output + "_F.mtx", c.output + "_T.mtx"};
    std::ofstream f(c.output + "_meta.json");
    if (!f) throw sae::ConfigError("cannot write " + c.output + "_meta.json");
    f << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv)
{
    RunConfig cfg;
    CLI::App app{"Laplacian eigenvalues on the unit square under self-adjoint boundary conditions"};
    app.require_subcommand(1);

    auto common = [&](CLI::App* s) {
        s->add_option("--n", cfg.n, "nodes per side (odd, >= 5)");
        s->add_option("--bc", cfg.bc, "dirichlet|neumann|robin|periodic|quasiperiodic|piecewise-robin");
        s->add_option("--alpha", cfg.alpha_text, "angle for robin/quasiperiodic; radians or e.g. 0.9pi");
        s->add_option("--bc-file", cfg.bc_file, "unitary matrix file (SAE-U v1)");
        s->add_option("--lambda1", cfg.lambda1, "piecewise-robin Lambda on the lower half");
        s->add_option("--lambda2", cfg.lambda2, "piecewise-robin Lambda on the upper half");
        s->add_option("--k", cfg.k, "number of eigenvalues");
        s->add_option("--output", cfg.output, "output path (default stdout)");
        s->add_option("--format", cfg.format, "csv|json");
        s->add_option("--grid", cfg.grid, "eigenfunction sampling points per axis");
        s->add_option("--normal-convention", cfg.convention, "row|outward");
        s->add_option("--dense-threshold", cfg.dense_threshold, "largest N solved densely");
        s->add_flag("--timing", cfg.timing, "add wall time to the metadata");
    };
    auto* solve = app.add_subcommand("solve", "eigenvalues for one configuration");
    common(solve);
    solve->add_option("--dump-mesh", cfg.dump_mesh, "write the mesh as JSON");
    solve->add_option("--dump-basis", cfg.dump_basis, "write boundary basis functions as CSV");
    solve->add_option("--eigenfunctions", cfg.eigenfunctions, "directory for sampled eigenfunctions");
    auto* sweep = app.add_subcommand("sweep", "eigenvalues over a range of alpha");
    common(sweep);
    sweep->add_option("--alpha-start", cfg.alpha_start_text);
    sweep->add_option("--alpha-stop", cfg.alpha_stop_text);
    sweep->add_option("--alpha-steps", cfg.alpha_steps);
    sweep->add_option("--jobs", cfg.jobs, "worker threads");
    auto* conv = app.add_subcommand("convergence", "errors against the exact solution over several n");
    common(conv);
    conv->add_option("--n-list", cfg.n_list_text, "comma-separated odd sizes");
    conv->add_option("--jobs", cfg.jobs, "worker threads");
    auto* cmp = app.add_subcommand("compare-natural", "unitary vs natural scheme for piecewise Robin");
    common(cmp);
    auto* exp = app.add_subcommand("export-matrices", "write M, B, F and T in Matrix Market format");
    common(exp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command == "compare-natural" && cfg.bc == "dirichlet") cfg.bc = "piecewise-robin";

    try {
        validate(cfg);
        if (cfg.command == "solve") cmd_solve(cfg);
        else if (cfg.command == "sweep") cmd_sweep(cfg);
        else if (cfg.command == "convergence") cmd_convergence(cfg);
        else if (cfg.command == "compare-natural") cmd_compare_natural(cfg);
        else cmd_export(cfg);
    } catch (const sae::IncompatibleSystemError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const sae::SolverError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const sae::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
