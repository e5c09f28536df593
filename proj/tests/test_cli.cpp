// The hmotor executable end to end, plus the config and CSV layers in-process.
#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"

namespace fs = std::filesystem;
using namespace hmotor;

namespace {

const fs::path kSource = HMOTOR_SOURCE_DIR;
const fs::path kConfigs = kSource / "configs";

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() /
               ("hmotor_cli_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override {
        if (!HasFailure()) fs::remove_all(dir_);
    }

    /// Runs the binary with HMOTOR_OUTPUT_DIR cleared unless `env_dir` is given.
    Outcome run(const std::vector<std::string>& args, const std::string& env_dir = "") const {
        std::string cmd = env_dir.empty() ? "env -u HMOTOR_OUTPUT_DIR " : "env HMOTOR_OUTPUT_DIR=" + quote(env_dir) + " ";
        cmd += quote(HMOTOR_BINARY);
        for (const auto& a : args) cmd += " " + quote(a);
        const fs::path so = dir_ / "stdout.txt";
        const fs::path se = dir_ / "stderr.txt";
        cmd += " >" + quote(so.string()) + " 2>" + quote(se.string());
        const int status = std::system(cmd.c_str());
        Outcome r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(so);
        r.err = slurp(se);
        return r;
    }

    fs::path write(const std::string& name, const std::string& text) const {
        const fs::path p = dir_ / name;
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }

    fs::path dir_;
};

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            row.push_back(cell.empty() || *end != '\0' ? std::nan("") : v);
        }
        if (!line.empty() && line.back() == ',') row.push_back(std::nan(""));
        rows.push_back(row);
    }
    return rows;
}

const std::string kLinearModel = R"(schema_version: 1
model:
  kind: linear_pmsm
  inertia: 1.0e-3
  params:
    L_d: 9.1467e-3
    L_q: 13.575e-3
    phi_M: 0.196
    n_p: 3
    R_s: 1.52
)";

const std::string kSaturatedIpm = R"(schema_version: 1
model:
  kind: saturated_pmsm
  params:
    phi_M: 0.196
    n_p: 3
    R_s: 1.52
    scaled: true
    inv_L_d: 4.20
    inv_L_q: 2.83
    alpha_30: 0.770
    alpha_12: 0.702
    alpha_40: 0.486
    alpha_22: 0.734
    alpha_04: 0.175
)";

}  // namespace

// -----------------------------------------------------------------------------
// Shipped configs
// -----------------------------------------------------------------------------

TEST_F(CliTest, EveryShippedConfigValidatesAndRuns) {
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(kConfigs)) {
        if (entry.path().extension() != ".yaml") continue;
        ++seen;
        const std::string cfg = entry.path().string();
        SCOPED_TRACE(cfg);
        const cli::Config parsed = cli::load_config(cfg);

        std::vector<std::string> verbs{"validate"};
        if (parsed.sim && !parsed.sweep) verbs.push_back(parsed.model->is_induction() ? "im-sim" : "simulate");
        if (parsed.ripple) verbs.push_back("ripple");
        if (parsed.flux_map) verbs.push_back("flux-map");
        if (parsed.identify) verbs.push_back("identify");
        if (parsed.sweep) verbs.push_back("sweep");
        for (const auto& verb : verbs) {
            const fs::path out = dir_ / (entry.path().stem().string() + "_" + verb + (verb == "sweep" ? "" : ".csv"));
            const Outcome r = run({verb, "--config", cfg, "--out", out.string(), "--quiet"});
            EXPECT_EQ(r.code, 0) << verb << ": " << r.err;
            EXPECT_TRUE(fs::exists(out)) << verb;
        }
    }
    EXPECT_GE(seen, 7);
}

TEST_F(CliTest, ShippedSamplesAreTheFluxMapOutput) {
    const fs::path out = dir_ / "map.csv";
    ASSERT_EQ(run({"flux-map", "-c", (kConfigs / "saturated_ipm.yaml").string(), "-o", out.string(), "-q"}).code, 0);
    EXPECT_EQ(slurp(out), slurp(kConfigs / "data" / "ipm_samples.csv"));
}

// -----------------------------------------------------------------------------
// Determinism
// -----------------------------------------------------------------------------

TEST_F(CliTest, SimulateIsByteIdenticalOnRerun) {
    const std::string cfg = (kConfigs / "linear_ipm.yaml").string();
    const fs::path a = dir_ / "a.csv", b = dir_ / "b.csv";
    ASSERT_EQ(run({"simulate", "-c", cfg, "-o", a.string(), "--seed", "5"}).code, 0);
    ASSERT_EQ(run({"simulate", "-c", cfg, "-o", b.string(), "--seed", "5"}).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(CliTest, NoisyFluxMapDependsOnlyOnSeed) {
    const std::string cfg = (kConfigs / "saturated_spm.yaml").string();
    const fs::path a = dir_ / "a.csv", b = dir_ / "b.csv", c = dir_ / "c.csv";
    ASSERT_EQ(run({"flux-map", "-c", cfg, "-o", a.string(), "--seed", "3"}).code, 0);
    ASSERT_EQ(run({"flux-map", "-c", cfg, "-o", b.string(), "--seed", "3"}).code, 0);
    ASSERT_EQ(run({"flux-map", "-c", cfg, "-o", c.string(), "--seed", "4"}).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_NE(slurp(a), slurp(c));
}

TEST_F(CliTest, SweepOutputDoesNotDependOnWorkerCount) {
    const std::string cfg = (kConfigs / "sweep_rs.yaml").string();
    const fs::path one = dir_ / "one", many = dir_ / "many";
    ASSERT_EQ(run({"sweep", "-c", cfg, "-o", one.string(), "--jobs", "1", "-q"}).code, 0);
    ASSERT_EQ(run({"sweep", "-c", cfg, "-o", many.string(), "--jobs", "4", "-q"}).code, 0);
    const auto index = read_csv(one / "sweep.csv");
    ASSERT_EQ(index.size(), 5u);
    for (int k = 0; k < 5; ++k) {
        const std::string f = "run_" + std::to_string(k) + ".csv";
        EXPECT_EQ(slurp(one / f), slurp(many / f)) << f;
    }
    EXPECT_EQ(slurp(one / "sweep.csv"), slurp(many / "sweep.csv"));
}

TEST_F(CliTest, SweepRunMatchesTheEquivalentSingleSimulation) {
    const fs::path sweep = dir_ / "sweep";
    ASSERT_EQ(run({"sweep", "-c", (kConfigs / "sweep_rs.yaml").string(), "-o", sweep.string(), "--param",
                   "model.params.R_s", "--values", "0.75,2.5", "-q"})
                  .code,
              0);
    std::string text = slurp(kConfigs / "sweep_rs.yaml");
    text.replace(text.find("R_s: 1.52"), 9, "R_s: 2.5");
    const fs::path single = dir_ / "single.csv";
    ASSERT_EQ(run({"simulate", "-c", write("r25.yaml", text).string(), "-o", single.string(), "-q"}).code, 0);
    EXPECT_EQ(slurp(sweep / "run_1.csv"), slurp(single));
}

// -----------------------------------------------------------------------------
// simulate / im-sim
// -----------------------------------------------------------------------------

TEST_F(CliTest, EquilibriumConfigGivesConstantRows) {
    const auto cfg = write("equilibrium.yaml", kLinearModel + "sim: {dt: 1.0e-4, t_end: 0.01}\n");
    const fs::path out = dir_ / "equilibrium.csv";
    const Outcome r = run({"simulate", "-c", cfg.string(), "-o", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::string header;
    const auto rows = read_csv(out, &header);
    EXPECT_EQ(header, "t,theta,rho,omega,phi_d,phi_q,i_d,i_q,u_d,u_q,torque,load");
    ASSERT_EQ(rows.size(), 101u);
    for (const auto& row : rows) {
        ASSERT_EQ(row.size(), 12u);
        for (std::size_t c = 1; c < row.size(); ++c) EXPECT_EQ(row[c], rows.front()[c]) << "column " << c;
    }
    EXPECT_EQ(rows.front()[4], 0.196);
    EXPECT_NE(r.out.find("mean torque: 0 N m"), std::string::npos) << r.out;
}

TEST_F(CliTest, InductionTrajectoryHasRotorColumns) {
    const fs::path out = dir_ / "im.csv";
    ASSERT_EQ(run({"im-sim", "-c", (kConfigs / "induction.yaml").string(), "-o", out.string(), "-q"}).code, 0);
    std::string header;
    const auto rows = read_csv(out, &header);
    EXPECT_EQ(header,
              "t,theta,rho,omega,phi_d,phi_q,i_d,i_q,u_d,u_q,torque,load,phi_rd,phi_rq,i_rd,i_rq,theta_s");
    ASSERT_FALSE(rows.empty());
    EXPECT_EQ(rows.back().size(), 17u);
    // theta_s advances at the constant synchronous speed
    EXPECT_NEAR(rows.back()[16], 314.1592653589793 * rows.back()[0], 1e-9);
}

TEST_F(CliTest, ModelFamilyMustMatchTheVerb) {
    const Outcome a = run({"simulate", "-c", (kConfigs / "induction.yaml").string(), "-o", (dir_ / "a.csv").string()});
    EXPECT_EQ(a.code, 1);
    EXPECT_NE(a.err.find("im-sim"), std::string::npos);
    const Outcome b = run({"im-sim", "-c", (kConfigs / "linear_ipm.yaml").string(), "-o", (dir_ / "b.csv").string()});
    EXPECT_EQ(b.code, 1);
}

TEST_F(CliTest, StationaryFrameRunMatchesRotatingFrameRun) {
    std::string text = slurp(kConfigs / "saturated_ipm.yaml");
    const fs::path ab = dir_ / "ab.csv", dq = dir_ / "dq.csv";
    ASSERT_EQ(run({"simulate", "-c", write("ab.yaml", text).string(), "-o", ab.string(), "-q"}).code, 0);
    text.replace(text.find("frame: stationary"), 17, "frame: rotating");
    ASSERT_EQ(run({"simulate", "-c", write("dq.yaml", text).string(), "-o", dq.string(), "-q"}).code, 0);
    const auto ra = read_csv(ab), rd = read_csv(dq);
    ASSERT_EQ(ra.size(), rd.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < ra.size(); ++k)
        for (int c : {4, 5, 6, 7, 8, 9, 10}) worst = std::max(worst, std::abs(ra[k][c] - rd[k][c]) / (1.0 + std::abs(rd[k][c])));
    EXPECT_LT(worst, 1e-9);
}

TEST_F(CliTest, OutputDirectoryFromEnvironment) {
    const fs::path env = dir_ / "envout";
    const Outcome r = run({"simulate", "-c", (kConfigs / "synrm.yaml").string(), "-q"}, env.string());
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(env / "trajectory.csv"));
}

TEST_F(CliTest, SummaryReportsPowerBalance) {
    const Outcome r = run({"simulate", "-c", (kConfigs / "linear_ipm.yaml").string(), "-o", (dir_ / "x.csv").string()});
    ASSERT_EQ(r.code, 0);
    const auto pos = r.out.find("power balance residual: ");
    ASSERT_NE(pos, std::string::npos) << r.out;
    EXPECT_LT(std::stod(r.out.substr(pos + 24)), 1e-6);
    EXPECT_NE(r.out.find("final state: t = 0.2"), std::string::npos);
}

// -----------------------------------------------------------------------------
// Diagnostics and exit codes
// -----------------------------------------------------------------------------

TEST_F(CliTest, NonPositiveInductanceIsRejectedByKeyAndLine) {
    std::string text = slurp(kConfigs / "linear_ipm.yaml");
    text.replace(text.find("L_d: 9.1467e-3"), 14, "L_d: 0.0");
    const Outcome r = run({"simulate", "-c", write("bad.yaml", text).string(), "-o", (dir_ / "x.csv").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("bad.yaml:10: model.params.L_d: must be > 0"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(dir_ / "x.csv"));
}

TEST_F(CliTest, DegenerateInductionParametersAreRejected) {
    std::string text = slurp(kConfigs / "induction.yaml");
    text.replace(text.find("L_m: 0.16"), 9, "L_m: 0.17");
    const Outcome r = run({"im-sim", "-c", write("im.yaml", text).string(), "-o", (dir_ / "x.csv").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("model.params.L_m"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownKeyIsAnError) {
    const auto cfg = write("k.yaml", kLinearModel + "sim:\n  dt: 1.0e-5\n  t_end: 0.01\n  stepsize: 3\n");
    const Outcome r = run({"simulate", "-c", cfg.string(), "-o", (dir_ / "x.csv").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("k.yaml:14: sim.stepsize: unknown key"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownFlagIsAnError) {
    const Outcome r = run({"simulate", "-c", (kConfigs / "linear_ipm.yaml").string(), "--dt", "1e-4"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--dt"), std::string::npos) << r.err;
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({}).code, 1);
}

TEST_F(CliTest, HelpListsEveryFlagOfEveryVerb) {
    const std::vector<std::pair<std::string, std::vector<std::string>>> verbs{
        {"simulate", {}},
        {"im-sim", {}},
        {"identify", {"--samples", "--phi-M", "--refine-phi-M", "--covariance"}},
        {"ripple", {}},
        {"validate", {"--samples", "--tolerance"}},
        {"flux-map", {}},
        {"sweep", {"--param", "--values", "--jobs"}},
    };
    for (const auto& [verb, extra] : verbs) {
        const Outcome r = run({verb, "--help"});
        EXPECT_EQ(r.code, 0) << verb;
        for (const std::string flag : {"--config", "--out", "--seed", "--quiet", "--help"})
            EXPECT_NE(r.out.find(flag), std::string::npos) << verb << " " << flag;
        for (const auto& flag : extra) EXPECT_NE(r.out.find(flag), std::string::npos) << verb << " " << flag;
    }
    const Outcome top = run({"--help"});
    EXPECT_EQ(top.code, 0);
    for (const auto& [verb, extra] : verbs) EXPECT_NE(top.out.find(verb), std::string::npos) << verb;
}

TEST_F(CliTest, MissingFilesAreIoErrors) {
    EXPECT_EQ(run({"simulate", "-c", (dir_ / "nope.yaml").string()}).code, 3);
    EXPECT_EQ(run({"identify", "--samples", (dir_ / "nope.csv").string(), "--phi-M", "0.2"}).code, 3);
    const fs::path blocker = write("file", "x");
    const Outcome r = run({"simulate", "-c", (kConfigs / "synrm.yaml").string(), "-o", (blocker / "x.csv").string()});
    EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(CliTest, DivergentRunIsANumericalFailureWithTimestamp) {
    const auto cfg = write("blow.yaml", R"(schema_version: 1
model: {kind: linear_pmsm, params: {L_d: 1.0e-3, L_q: 1.0e-3, phi_M: 0.1, n_p: 2}}
drive: {voltage: {type: constant, u_q: 1.0e300}}
sim: {dt: 1.0e-3, t_end: 1.0}
)");
    const Outcome r = run({"simulate", "-c", cfg.string(), "-o", (dir_ / "x.csv").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("t = "), std::string::npos) << r.err;
}

TEST_F(CliTest, YamlSyntaxErrorNamesTheLine) {
    const auto cfg = write("syn.yaml", "schema_version: 1\nmodel:\n  kind: [linear_pmsm\n");
    const Outcome r = run({"validate", "-c", cfg.string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("syn.yaml:"), std::string::npos) << r.err;
}

// -----------------------------------------------------------------------------
// identify
// -----------------------------------------------------------------------------

TEST_F(CliTest, IdentifyRecoversTheIpmTableFromNoiselessSamples) {
    const auto cfg = write("ipm.yaml", kSaturatedIpm +
                                           "flux_map: {phi_d: [0.0392, 0.3528, 9], phi_q: [-0.1568, 0.1568, 9]}\n");
    const fs::path samples = dir_ / "samples.csv", report = dir_ / "report.csv";
    ASSERT_EQ(run({"flux-map", "-c", cfg.string(), "-o", samples.string(), "-q"}).code, 0);
    const Outcome r = run({"identify", "--samples", samples.string(), "--phi-M", "0.196", "-o", report.string()});
    ASSERT_EQ(r.code, 0) << r.err;

    std::ifstream in(report);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "parameter,value,std_error,raw_parameter,raw_value,raw_std_error");
    const auto& truth = reference::kIpmScaled;
    for (std::size_t k = 0; k < 7; ++k) {
        ASSERT_TRUE(std::getline(in, line));
        std::stringstream ss(line);
        std::string name, value;
        std::getline(ss, name, ',');
        std::getline(ss, value, ',');
        EXPECT_EQ(name, kScaledNames[k]);
        EXPECT_NEAR(std::stod(value), truth[k], 1e-6 * truth[k]) << name;
    }
}

TEST_F(CliTest, IdentifyReadsSettingsFromTheConfig) {
    const fs::path report = dir_ / "r.csv";
    const Outcome r = run({"identify", "-c", (kConfigs / "saturated_ipm.yaml").string(), "-o", report.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = read_csv(report);
    ASSERT_EQ(rows.size(), 8u);
    for (std::size_t k = 0; k < 7; ++k) {
        // 1% noise on a 21 x 21 grid: within 5% and within 4 standard errors
        EXPECT_NEAR(rows[k][1], reference::kIpmScaled[k], 0.05 * reference::kIpmScaled[k]);
        EXPECT_LT(std::abs(rows[k][1] - reference::kIpmScaled[k]), 4.0 * rows[k][2]);
    }
}

TEST_F(CliTest, IdentifyRefinesPhiM) {
    const auto cfg = write("ipm.yaml", kSaturatedIpm +
                                           "flux_map: {phi_d: [0.0392, 0.3528, 9], phi_q: [-0.1568, 0.1568, 9]}\n");
    const fs::path samples = dir_ / "samples.csv", report = dir_ / "report.csv";
    ASSERT_EQ(run({"flux-map", "-c", cfg.string(), "-o", samples.string(), "-q"}).code, 0);
    ASSERT_EQ(run({"identify", "--samples", samples.string(), "--phi-M", "0.2", "--refine-phi-M", "-o",
                   report.string(), "-q"})
                  .code,
              0);
    const auto rows = read_csv(report);
    ASSERT_EQ(rows.size(), 8u);
    EXPECT_NEAR(rows[7][1], 0.196, 1e-9);
}

TEST_F(CliTest, SixSamplesAreInsufficient) {
    std::string text = "phi_d,phi_q,i_d,i_q\n";
    for (int k = 0; k < 6; ++k) text += std::to_string(0.1 + 0.01 * k) + ",0.01,1.0,2.0\n";
    const Outcome r = run({"identify", "--samples", write("six.csv", text).string(), "--phi-M", "0.196", "-o",
                       (dir_ / "x.csv").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("insufficient samples"), std::string::npos) << r.err;
}

TEST_F(CliTest, MalformedRowReportsItsRowNumber) {
    std::string text = "phi_d,phi_q,i_d,i_q\n";
    for (int k = 0; k < 8; ++k) text += "0.1,0.01,1.0,2.0\n";
    text += "0.1,0.01,1.0\n";
    const Outcome r = run({"identify", "--samples", write("bad.csv", text).string(), "--phi-M", "0.196"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("row 10"), std::string::npos) << r.err;
}

TEST_F(CliTest, RankDeficientSamplesNameTheDirection) {
    // phi_q = 0 everywhere: nothing constrains the q-axis terms
    std::string text;
    for (int k = 0; k < 20; ++k) text += cli::fmt(0.1 + 0.01 * k) + ",0," + cli::fmt(k * 0.5) + ",0\n";
    const Outcome r = run({"identify", "--samples", write("flat.csv", text).string(), "--phi-M", "0.196"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("inv_L_q"), std::string::npos) << r.err;
}

// -----------------------------------------------------------------------------
// ripple / flux-map / validate
// -----------------------------------------------------------------------------

TEST_F(CliTest, RippleWithoutHarmonicsHasConstantTorque) {
    const auto cfg = write("rip.yaml", kSaturatedIpm + "ripple: {points: 97, omega: 150.0, phi: [0.21, 0.07]}\n");
    const fs::path out = dir_ / "rip.csv";
    const Outcome r = run({"ripple", "-c", cfg.string(), "-o", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::string header;
    const auto rows = read_csv(out, &header);
    EXPECT_EQ(header, "theta,torque,i_d,i_q,v_N");
    ASSERT_EQ(rows.size(), 97u);
    for (const auto& row : rows) {
        EXPECT_EQ(row[1], rows.front()[1]);
        EXPECT_TRUE(std::isnan(row[4]));
    }
    EXPECT_NE(rows.front()[1], 0.0);
}

TEST_F(CliTest, HarmonicRippleRepeatsEverySixthOfARevolution) {
    const fs::path out = dir_ / "rip.csv";
    ASSERT_EQ(run({"ripple", "-c", (kConfigs / "harmonic_ipm.yaml").string(), "-o", out.string(), "-q"}).code, 0);
    const auto rows = read_csv(out);
    ASSERT_EQ(rows.size(), 721u);  // 0.5 degree spacing: pi/3 is 120 rows
    double t_max = 0.0, period = 0.0, vn_max = 0.0, vn_period = 0.0, spread = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        t_max = std::max(t_max, std::abs(rows[k][1]));
        vn_max = std::max(vn_max, std::abs(rows[k][4]));
        spread = std::max(spread, std::abs(rows[k][1] - rows[0][1]));
        if (k + 120 < rows.size()) period = std::max(period, std::abs(rows[k + 120][1] - rows[k][1]));
        if (k + 240 < rows.size()) vn_period = std::max(vn_period, std::abs(rows[k + 240][4] - rows[k][4]));
    }
    EXPECT_GT(spread, 1e-3 * t_max);
    EXPECT_LT(period, 1e-12 * t_max);
    EXPECT_GT(vn_max, 0.0);
    EXPECT_LT(vn_period, 1e-12 * vn_max);
}

TEST_F(CliTest, LinearFluxMapIsAffineInFlux) {
    const auto cfg = write("lin.yaml", kLinearModel + "flux_map: {phi_d: [0.0, 0.4, 11], phi_q: [-0.2, 0.2, 7]}\n");
    const fs::path out = dir_ / "map.csv";
    ASSERT_EQ(run({"flux-map", "-c", cfg.string(), "-o", out.string(), "-q"}).code, 0);
    std::string header;
    const auto rows = read_csv(out, &header);
    EXPECT_EQ(header, "phi_d,phi_q,i_d,i_q");
    ASSERT_EQ(rows.size(), 77u);
    Eigen::MatrixXd a(rows.size(), 3);
    Eigen::VectorXd b(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        a.row(static_cast<Eigen::Index>(k)) << 1.0, rows[k][0], rows[k][1];
        b[static_cast<Eigen::Index>(k)] = rows[k][2];
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(b);
    EXPECT_LT((a * coef - b).cwiseAbs().maxCoeff(), 1e-12 * b.cwiseAbs().maxCoeff());
    EXPECT_NEAR(coef[1], 1.0 / 9.1467e-3, 1e-9 / 9.1467e-3);
    EXPECT_NEAR(coef[0], -0.196 / 9.1467e-3, 1e-9 / 9.1467e-3);
    EXPECT_NEAR(coef[2], 0.0, 1e-9);
}

TEST_F(CliTest, ValidateWritesTheReportAndFailsOnViolation) {
    const std::string cfg = (kConfigs / "induction.yaml").string();
    const fs::path out = dir_ / "v.csv";
    const Outcome ok = run({"validate", "-c", cfg, "-o", out.string(), "--samples", "500"});
    ASSERT_EQ(ok.code, 0) << ok.err;
    std::string header;
    const auto rows = read_csv(out, &header);
    EXPECT_EQ(header, "check,samples,max_abs,max_rel,tolerance,passed");
    EXPECT_EQ(rows.size(), 3u);
    EXPECT_NE(ok.out.find("im_rotation"), std::string::npos);

    // a tolerance below round-off turns the rotation check into a failure
    const Outcome bad = run({"validate", "-c", cfg, "-o", out.string(), "--samples", "500", "--tolerance", "1e-300"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
    EXPECT_NE(slurp(out).find("false"), std::string::npos);
}

// -----------------------------------------------------------------------------
// In-process: config schema and CSV
// -----------------------------------------------------------------------------

namespace {

cli::Config parse(const std::string& text) { return cli::parse_config(YAML::Load(text), "test.yaml"); }

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(ConfigSchema, ScaledAndRawCoefficientsAgree) {
    const auto scaled = parse(kSaturatedIpm).model->saturated;
    const auto ref = reference::ipm(kinetic_coeff(presets::kInertia, 3));
    std::string raw = R"(schema_version: 1
model:
  kind: saturated_pmsm
  params:
    phi_M: 0.196
    n_p: 3
    R_s: 1.52
)";
    const auto m = ref.magnetic();
    for (std::size_t k = 0; k < 7; ++k) raw += "    " + std::string(kMagneticNames[k]) + ": " + cli::fmt(m[k]) + "\n";
    const auto unscaled = parse(raw).model->saturated;
    for (std::size_t k = 0; k < 7; ++k) {
        EXPECT_NEAR(scaled.magnetic()[k], m[k], 1e-14 * std::abs(m[k]));
        EXPECT_EQ(unscaled.magnetic()[k], m[k]);
    }
    EXPECT_EQ(scaled.kinetic_coeff, ref.kinetic_coeff);
}

TEST(ConfigSchema, RawInductancesAreAcceptedInPlaceOfInverses) {
    const auto c = parse("schema_version: 1\nmodel: {kind: saturated_pmsm, params: {phi_M: 0.2, n_p: 2, L_d: 0.01, "
                         "L_q: 0.02}}\n")
                       .model->saturated;
    EXPECT_DOUBLE_EQ(c.inv_L_d, 100.0);
    EXPECT_DOUBLE_EQ(c.inv_L_q, 50.0);
    EXPECT_EQ(c.alpha_40, 0.0);
    EXPECT_NE(error_of("schema_version: 1\nmodel: {kind: saturated_pmsm, params: {phi_M: 0.2, n_p: 2, scaled: "
                       "true, L_d: 0.01, inv_L_q: 2.0}}\n")
                  .find("L_d: not accepted with scaled: true"),
              std::string::npos);
}

TEST(ConfigSchema, KineticCoefficientConventions) {
    const std::string base = "schema_version: 1\nmodel:\n  kind: linear_pmsm\n";
    const std::string params = "  params: {L_d: 0.01, L_q: 0.02, phi_M: 0.1, n_p: 4}\n";
    EXPECT_DOUBLE_EQ(parse(base + params).model->linear.kinetic_coeff, 16.0 / presets::kInertia);
    EXPECT_DOUBLE_EQ(parse(base + "  inertia: 0.5\n  kinetic_convention: literal\n" + params).model->linear.kinetic_coeff,
                     1.0 / (0.5 * 16.0));
    EXPECT_DOUBLE_EQ(parse(base + "  kinetic_coeff: 7.0\n" + params).model->linear.kinetic_coeff, 7.0);
    EXPECT_NE(error_of(base + "  kinetic_coeff: 7.0\n  inertia: 1.0\n" + params).find("model.kinetic_coeff"),
              std::string::npos);
    EXPECT_NE(error_of(base + "  inertia: 0.0\n" + params).find("test.yaml:4: model.inertia: must be > 0"),
              std::string::npos);
}

TEST(ConfigSchema, VersionAndStructureErrors) {
    EXPECT_NE(error_of("schema_version: 2\n").find("unsupported version 2"), std::string::npos);
    EXPECT_NE(error_of("seed: 1\n").find("schema_version: required key is missing"), std::string::npos);
    EXPECT_NE(error_of("schema_version: 1\nmodel: 3\n").find("model: expected a mapping"), std::string::npos);
    EXPECT_NE(error_of("schema_version: 1\nmodel: {kind: pmsm, params: {}}\n").find("must be one of"),
              std::string::npos);
    EXPECT_NE(error_of(kLinearModel + "initial: {rho: 1.0, omega: 2.0}\n").find("give either rho or omega"),
              std::string::npos);
    EXPECT_NE(error_of(kLinearModel + "initial: {phi: [1, 2, 3, 4]}\n").find("expected 2 flux components"),
              std::string::npos);
    EXPECT_NE(error_of(kLinearModel + "sim: {dt: fast, t_end: 1}\n").find("sim.dt: expected a number"),
              std::string::npos);
    EXPECT_NE(error_of(kLinearModel + "sim: {dt: 1.0e-3, t_end: 1.0e-4}\n").find("sim.t_end"), std::string::npos);
    EXPECT_NE(error_of(kLinearModel + "drive: {voltage: {type: table, t: [0, 1], u_d: [0], u_q: [0, 0]}}\n")
                  .find("drive.voltage.u_d: expected 2 values"),
              std::string::npos);
    EXPECT_NE(error_of(kLinearModel + "drive: {load: {type: table, t: [1, 0], torque: [0, 0]}}\n")
                  .find("drive.load.t: must be increasing"),
              std::string::npos);
    EXPECT_NE(error_of(kLinearModel + "sim: {t_end: 1, omega_s: 3}\n").find("sim.omega_s"), std::string::npos);
}

TEST(ConfigSchema, HarmonicParityViolationPointsAtTheTerm) {
    const std::string text = kSaturatedIpm + "    harmonics:\n      - k: 1\n        a: [[1, 1, 0.01]]\n";
    std::string cfg = text;
    cfg.replace(cfg.find("saturated_pmsm"), 14, "harmonic_pmsm");
    const std::string err = error_of(cfg);
    EXPECT_NE(err.find("test.yaml:18: model.params.harmonics[0].a x^1 y^1"), std::string::npos) << err;
    cfg.replace(cfg.find("[1, 1, 0.01]"), 12, "[5, 0, 0.01]");
    EXPECT_NE(error_of(cfg).find("capped at degree 4"), std::string::npos);
}

TEST(ConfigSchema, DefaultsAndInitialState) {
    const auto cfg = parse(kLinearModel + "sim: {t_end: 0.01}\ninitial: {omega: 90.0, theta: 0.5}\n");
    EXPECT_EQ(cfg.sim->dt, 1e-5);
    EXPECT_EQ(cfg.sim->integrator, Integrator::rk4);
    EXPECT_EQ(cfg.seed, 1u);
    const auto m = cfg.model->build();
    const MachineState s = cfg.initial_state(*m);
    EXPECT_EQ(s.theta, 0.5);
    EXPECT_NEAR(m->d_rho(0.0, s.rho, s.phi), 90.0, 1e-12);
    EXPECT_EQ(s.phi, Eigen::Vector2d(0.196, 0.0));

    const auto im = parse(slurp(kConfigs / "induction.yaml"));
    EXPECT_EQ(im.initial_state(*im.model->build()).phi, Eigen::VectorXd::Zero(4));
}

TEST(ConfigSchema, ValidityBoxWarnings) {
    EXPECT_TRUE(parse(kSaturatedIpm + "initial: {phi: [0.2, 0.1]}\n").warnings.empty());
    const auto cfg = parse(kSaturatedIpm + "initial: {phi: [0.45, 0.1]}\n");
    ASSERT_EQ(cfg.warnings.size(), 1u);
    EXPECT_NE(cfg.warnings[0].find("initial.phi"), std::string::npos);
}

TEST(ConfigSchema, SetPathRewritesOneScalar) {
    YAML::Node doc = YAML::Load(slurp(kConfigs / "harmonic_ipm.yaml"));
    cli::set_path(doc, "model.params.R_s", 2.5);
    cli::set_path(doc, "model.params.zero_axis[1].s", 0.25);
    const auto cfg = cli::parse_config(doc, "h.yaml");
    EXPECT_EQ(cfg.model->harmonic.base.R_s, 2.5);
    EXPECT_EQ((*cfg.model->harmonic.zero_axis)[1].s, 0.25);
    EXPECT_THROW(cli::set_path(doc, "model.params.nothing", 1.0), ParameterError);
    EXPECT_THROW(cli::set_path(doc, "model.params", 1.0), ParameterError);
    EXPECT_THROW(cli::set_path(doc, "model.params.zero_axis[7].s", 1.0), ParameterError);
}

TEST(Csv, SeventeenDigitsRoundTripExactly) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> ex(-300, 300);
    for (int k = 0; k < 10000; ++k) {
        const double v = std::ldexp(mant(rng), ex(rng));
        EXPECT_EQ(std::strtod(cli::fmt(v).c_str(), nullptr), v);
    }
}

TEST(Csv, SampleReaderFormats) {
    std::istringstream with_header("phi_d,phi_q,i_d,i_q,weight\n# comment\n\n0.1,0.2,3,4,2\n0.5, -0.25 ,1e-3,+7,1\n");
    const auto s = cli::parse_samples(with_header, "s");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].weight, 2.0);
    EXPECT_EQ(s[1].phi_q, -0.25);
    EXPECT_EQ(s[1].i_q, 7.0);

    std::istringstream bare("0.1,0.2,3,4\r\n");
    EXPECT_EQ(cli::parse_samples(bare, "s").size(), 1u);

    const auto err = [](const std::string& text) {
        std::istringstream in(text);
        try {
            cli::parse_samples(in, "s");
        } catch (const ParameterError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(err("phi_d,phi_q,i_q,i_d\n").find("row 1"), std::string::npos);
    EXPECT_NE(err("0.1,0.2,3,4\n0.1,0.2,3,4,0\n").find("row 2: weight must be > 0"), std::string::npos);
    EXPECT_NE(err("0.1,0.2,3,nan\n").find("row 1"), std::string::npos);
    EXPECT_NE(err("0.1,0.2,3,4,5,6\n").find("expected 4 or 5 fields"), std::string::npos);
}
