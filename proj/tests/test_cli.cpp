#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "eplab/expr.hpp"
#include "eplab/runner.hpp"

using namespace eplab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig from_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config_text(in);
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "eplab_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("basis expressions evaluate and differentiate in closed form") {
    auto e = BasisExpr::parse("2 + 0.5*x - 1.5*x^2 + 0.25*cos2 + 3*sin3_1", 2.0);
    const double x = 0.7;
    const double a1 = M_PI / 2.0, a2 = 2.0 * M_PI / 2.0;
    const double s = std::sin(a1 * x);
    const double expect = 2.0 + 0.5 * x - 1.5 * x * x + 0.25 * std::cos(a2 * x) + 3.0 * s * s * s;
    REQUIRE(e.value(x) == Catch::Approx(expect).epsilon(1e-14));

    // derivatives against central differences
    const double h = 1e-6;
    REQUIRE(e.deriv(x) == Catch::Approx((e.value(x + h) - e.value(x - h)) / (2 * h)).margin(1e-7));
    const double h2 = 1e-4;
    REQUIRE(e.deriv2(x) ==
            Catch::Approx((e.value(x + h2) - 2 * e.value(x) + e.value(x - h2)) / (h2 * h2))
                .margin(1e-5));

    // antiderivative: F(0) = 0 and F' = value
    REQUIRE(e.antideriv(0.0) == 0.0);
    REQUIRE((e.antideriv(x + h) - e.antideriv(x - h)) / (2 * h) ==
            Catch::Approx(e.value(x)).margin(1e-7));

    REQUIRE_THROWS_AS(BasisExpr::parse("1*tan1", 1.0), ConfigError);
    REQUIRE_THROWS_AS(BasisExpr::parse("", 1.0), ConfigError);
    REQUIRE_THROWS_AS(BasisExpr::parse("1 + ", 1.0), ConfigError);
}

TEST_CASE("config parsing: defaults, comments, diagnostics") {
    auto c = from_text("# comment\n\ngamma = 2.0\nnx = 16 # trailing\nseed = 42\n");
    REQUIRE(c.gamma == 2.0);
    REQUIRE(c.nx == 16);
    REQUIRE(c.seed == 42);
    REQUIRE(c.ny == 32); // default filled
    REQUIRE(c.effective_w_expr() == "1");

    try {
        from_text("gamma = 2.0\nbogus_key = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
        REQUIRE(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
    REQUIRE_THROWS_AS(from_text("nx = fast\n"), ConfigError);
    REQUIRE_THROWS_AS(from_text("case = sideways\n"), ConfigError);
    REQUIRE_THROWS_AS(from_text("gamma = 0.3\n"), ConfigError);
}

TEST_CASE("sign-indefinite coupling weight is rejected with the case name") {
    auto c = from_text("case = electric\nw_expr = -1 + 2*x\n");
    try {
        detail_run::make_doping(c);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("Case 1") != std::string::npos);
    }
    auto g = from_text("case = gravitational\nw_expr = 1\n");
    try {
        detail_run::make_doping(g);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("Case 2") != std::string::npos);
    }
}

TEST_CASE("background run on equilibrium data emits constant columns") {
    auto dir = fresh_dir("bg_equilibrium");
    auto c = from_text("gamma = 2.0\nJ = 0.5\nrho0 = 1.0\nE0 = 0\nw_expr = 1\nb_expr = 1\n"
                       "nsteps = 50\n");
    REQUIRE(run_subcommand("background", c, dir.string()) == 0);
    const std::string csv = slurp(dir / "background.csv");
    std::istringstream in(csv);
    std::string header, first, line;
    std::getline(in, header);
    REQUIRE(header == "x1,rho_bar,u_bar,E_bar,Phi_bar,mach");
    std::getline(in, first);
    const auto tail = first.substr(first.find(','));
    int rows = 1;
    while (std::getline(in, line)) {
        ++rows;
        REQUIRE(line.substr(line.find(',')) == tail); // identical besides x1
    }
    REQUIRE(rows == 51);
}

TEST_CASE("solve runs write fields and reruns are byte-identical") {
    auto dir1 = fresh_dir("solve_a");
    auto dir2 = fresh_dir("solve_b");
    auto c = from_text("gamma = 1.4\ncase = electric\nnx = 16\nny = 8\nJ = 0.5\nE0 = 0.1\n"
                       "h0_expr = 0.01*cos1\ng0_expr = 0.005*cos1\nvL_expr = 0.003*cos1\n");
    REQUIRE(run_subcommand("solve-potential", c, dir1.string()) == 0);
    REQUIRE(run_subcommand("solve-potential", c, dir2.string()) == 0);
    for (const char* f : {"fields.csv", "iterations.csv", "manifest.cfg"})
        REQUIRE(slurp(dir1 / f) == slurp(dir2 / f));

    // manifest re-ingestion reproduces identical outputs
    auto c2 = parse_config((dir1 / "manifest.cfg").string());
    auto dir3 = fresh_dir("solve_c");
    REQUIRE(run_subcommand("solve-potential", c2, dir3.string()) == 0);
    REQUIRE(slurp(dir1 / "fields.csv") == slurp(dir3 / "fields.csv"));
    REQUIRE(slurp(dir1 / "manifest.cfg") == slurp(dir3 / "manifest.cfg"));

    // the Newton cross-check path also runs end to end
    auto cn = c;
    cn.method = "newton";
    auto dirn = fresh_dir("solve_newton");
    REQUIRE(run_subcommand("solve-potential", cn, dirn.string()) == 0);
    REQUIRE(fs::exists(dirn / "iterations.csv"));
}

TEST_CASE("zero-perturbation solve emits the background extended in x2") {
    auto dir = fresh_dir("solve_zero");
    auto c = from_text("gamma = 1.4\ncase = electric\nnx = 16\nny = 8\nJ = 0.5\nE0 = 0.1\n");
    REQUIRE(run_subcommand("solve-potential", c, dir.string()) == 0);
    auto dirbg = fresh_dir("solve_zero_bg");
    auto cbg = from_text("gamma = 1.4\ncase = electric\nJ = 0.5\nE0 = 0.1\nnsteps = 16\n"
                         "background_refine = 64\n");
    // fields.csv rho at (i, j) matches the 1D profile at x1(i) for every j
    REQUIRE(run_subcommand("background", cbg, dirbg.string()) == 0);
    std::istringstream fin(slurp(dir / "fields.csv"));
    std::string line;
    std::getline(fin, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(fin, line)) {
        std::vector<double> vals;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
        rows.push_back(vals);
    }
    REQUIRE(rows.size() == 17 * 9);
    for (const auto& r : rows) {
        // u2 = 0 and mach in (0,1) everywhere
        REQUIRE(r[6] == 0.0);
        REQUIRE(r[7] > 0.0);
        REQUIRE(r[7] < 1.0);
    }
    // all rows with the same x1 agree in every field (constant in x2)
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = a + 1; b < rows.size(); ++b)
            if (rows[a][0] == rows[b][0])
                for (int k : {2, 3, 4, 5, 6, 7}) REQUIRE(rows[a][k] == rows[b][k]);
}

TEST_CASE("audit and uniqueness subcommands produce report CSVs") {
    auto dir = fresh_dir("audit3");
    auto c = from_text("case = gravitational\ngamma = 3\nlambda = 0.1\nn_pairs = 500\n");
    REQUIRE(run_subcommand("audit-convexity", c, dir.string()) == 0);
    const std::string audit = slurp(dir / "audit.csv");
    REQUIRE(audit.find("lambda_set") != std::string::npos);
    REQUIRE(audit.find(",0,") != std::string::npos); // zero violations column

    auto dir2 = fresh_dir("audit2");
    auto c2 = from_text("case = gravitational\ngamma = 2\nlambda = 0.1\nn_pairs = 500\n");
    REQUIRE(run_subcommand("audit-convexity", c2, dir2.string()) == 0);
    REQUIRE(fs::exists(dir2 / "counterexample.csv"));

    auto dir3 = fresh_dir("uniq");
    auto c3 = from_text("case = electric\ngamma = 1.4\nnx = 12\nny = 6\nE0 = 0.1\n"
                        "h0_expr = 0.01*cos1\nn_starts = 2\n");
    REQUIRE(run_subcommand("uniqueness-test", c3, dir3.string()) == 0);
    const std::string uniq = slurp(dir3 / "uniqueness.csv");
    REQUIRE(uniq.find("start_a") != std::string::npos);

    auto dir4 = fresh_dir("coerc");
    auto c4 = from_text("case = electric\ngamma = 1.4\nnx = 12\nny = 6\nn_trials = 8\n");
    REQUIRE(run_subcommand("coercivity-probe", c4, dir4.string()) == 0);
    REQUIRE(fs::exists(dir4 / "coercivity_summary.csv"));
}

TEST_CASE("boundary compatibility invariants are enforced per case") {
    // electric: h0'(x2) must vanish at both wall corners; a linear h0 fails
    auto c = from_text("case = electric\nnx = 8\nny = 8\nh0_expr = 0.01*x\nE0 = 0.1\n");
    auto dir = fresh_dir("compat_e");
    try {
        run_subcommand("solve-potential", c, dir.string());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(std::string(e.what()).find("h0'") != std::string::npos);
    }
    // gravitational: values and two derivatives of all data must vanish at
    // the endpoints; a cos mode has a nonvanishing value there
    auto g = from_text("case = gravitational\ngamma = 3\nnx = 8\nny = 8\nJ = 0.3\n"
                       "g0_expr = 0.01*cos1\n");
    REQUIRE_THROWS_AS(run_subcommand("solve-stream", g, dir.string()), ConfigError);
    // sin3 modes satisfy the gravitational conditions
    auto ok = from_text("case = gravitational\ngamma = 3\nnx = 8\nny = 8\nJ = 0.3\n"
                        "g0_expr = 0.01*sin3_1\nh0_expr = 0.01*sin3_1\nvL_expr = 0.01*sin3_2\n");
    REQUIRE(run_subcommand("solve-stream", ok, fresh_dir("compat_ok").string()) == 0);
}

TEST_CASE("gravitational uniqueness-test below gamma 3 warns and proceeds") {
    auto c = from_text("case = gravitational\ngamma = 2\nnx = 8\nny = 8\nJ = 0.3\n"
                       "g0_expr = 0.005*sin3_1\nn_starts = 2\n");
    auto dir = fresh_dir("uniq_gamma2");
    REQUIRE(run_subcommand("uniqueness-test", c, dir.string()) == 0);
    REQUIRE(fs::exists(dir / "uniqueness.csv"));
}

TEST_CASE("formulation/case mismatches are configuration errors") {
    auto c = from_text("case = gravitational\ngamma = 3\nnx = 8\nny = 8\nJ = 0.3\n");
    auto dir = fresh_dir("mismatch");
    REQUIRE_THROWS_AS(run_subcommand("solve-potential", c, dir.string()), ConfigError);
    auto c2 = from_text("case = electric\nnx = 8\nny = 8\n");
    REQUIRE_THROWS_AS(run_subcommand("solve-stream", c2, dir.string()), ConfigError);
    REQUIRE_THROWS_AS(run_subcommand("coercivity-probe", c, dir.string()), ConfigError);
    REQUIRE_THROWS_AS(run_subcommand("nonsense", c, dir.string()), ConfigError);
}

TEST_CASE("exit codes map error families") {
    REQUIRE(exit_code_for(ConfigError("x")) == exit_config);
    REQUIRE(exit_code_for(VacuumError("x")) == exit_vacuum);
    REQUIRE(exit_code_for(SonicBreakdown("x")) == exit_sonic);
    REQUIRE(exit_code_for(NoSubsonicRoot("x")) == exit_sonic);
    REQUIRE(exit_code_for(SonicDegeneracy("x")) == exit_sonic);
    REQUIRE(exit_code_for(DivergenceError("x")) == exit_divergence);
    REQUIRE(exit_code_for(SolverError("x")) == exit_solver);
    REQUIRE(exit_code_for(std::runtime_error("x")) == exit_error);
}
