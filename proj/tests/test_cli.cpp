#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace
{

fs::path work_dir()
{
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "hlsvd_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args)
{
    const std::string cmd = std::string("\"") + HLSVD_CLI + "\" " + args + " > \"" +
                            (work_dir() / "stdout.txt").string() + "\" 2> \"" +
                            (work_dir() / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string path(const std::string& name) { return "\"" + (work_dir() / name).string() + "\""; }

// Small sample so the whole pipeline runs in well under a second.
void write_small_config()
{
    std::ofstream out(work_dir() / "small.json");
    out << R"({"components": [{"type": "cuboctahedral", "fraction": 1.0, "max_shell": 4,
                                "size": {"xi": 3, "s": 0.3}}],
              "grid": {"theta0": 17, "dtheta": 0.05, "n": 160, "units": "degrees"}})";
}

class Cli : public ::testing::Test
{
protected:
    static void SetUpTestSuite()
    {
        write_small_config();
        ASSERT_EQ(run("synth --config " + path("small.json") + " --out " + path("mean.txt")), 0);
        ASSERT_EQ(run("noise --in " + path("mean.txt") + " --out " + path("noisy.txt") +
                      " --nsr 0.05 --seed 4"),
                  0);
    }
};

} // namespace

TEST_F(Cli, NoiseIsDeterministic)
{
    ASSERT_EQ(run("noise --in " + path("mean.txt") + " --out " + path("noisy2.txt") + " --nsr 0.05 --seed 4"), 0);
    EXPECT_EQ(slurp(work_dir() / "noisy.txt"), slurp(work_dir() / "noisy2.txt"));
    EXPECT_EQ(slurp(work_dir() / "stdout.txt").rfind("F=", 0), 0u);
}

TEST_F(Cli, NsrMatchesTarget)
{
    ASSERT_EQ(run("nsr --in " + path("mean.txt") + " --F 1"), 0);
    const std::string out = slurp(work_dir() / "stdout.txt");
    ASSERT_EQ(out.rfind("NSR=", 0), 0u);
    EXPECT_GT(std::stod(out.substr(4)), 0.0);
}

TEST_F(Cli, FilterFixedOrderIsDeterministic)
{
    ASSERT_EQ(run("filter --in " + path("noisy.txt") + " --out " + path("f1.txt") + " --K 6 --report " +
                  path("r1.json")),
              0);
    ASSERT_EQ(run("filter --in " + path("noisy.txt") + " --out " + path("f2.txt") + " --K 6 --report " +
                  path("r2.json")),
              0);
    EXPECT_EQ(slurp(work_dir() / "f1.txt"), slurp(work_dir() / "f2.txt"));
    EXPECT_EQ(slurp(work_dir() / "r1.json"), slurp(work_dir() / "r2.json"));
    EXPECT_EQ(slurp(work_dir() / "stdout.txt"), "K=6\n");
}

TEST_F(Cli, OrderScanWritesSeries)
{
    const int rc = run("order --in " + path("noisy.txt") + " --out " + path("scan.txt") + " --svg " +
                       path("scan.svg") + " --kmax 20");
    EXPECT_TRUE(rc == 0 || rc == 3);
    EXPECT_NE(slurp(work_dir() / "scan.txt").find("# frequency singular_value"), std::string::npos);
    EXPECT_NE(slurp(work_dir() / "scan.svg").find("</svg>"), std::string::npos);
}

TEST_F(Cli, UsageErrors)
{
    EXPECT_EQ(run("filter --in " + path("noisy.txt") + " --out " + path("x.txt") + " --K 0"), 2);
    EXPECT_NE(slurp(work_dir() / "stderr.txt").find("--K must be >= 1"), std::string::npos);
    EXPECT_EQ(run("filter --in " + path("noisy.txt") + " --out " + path("x.txt")), 2);
    EXPECT_EQ(run("filter --bogus"), 2);
    EXPECT_EQ(run("synth --preset 9 --out " + path("x.txt")), 2);
    EXPECT_EQ(run("filter --in " + path("noisy.txt") + " --out " + path("x.txt") + " --K 200"), 2);
}

TEST_F(Cli, DataErrors)
{
    EXPECT_EQ(run("filter --in " + path("missing.txt") + " --out " + path("x.txt") + " --K 3"), 3);
    {
        std::ofstream bad(work_dir() / "bad.txt");
        bad << "10 5\n11 -7\n";
    }
    EXPECT_EQ(run("nsr --in " + path("bad.txt")), 3);
}

TEST_F(Cli, Help)
{
    EXPECT_EQ(run("--help"), 0);
    EXPECT_NE(slurp(work_dir() / "stdout.txt").find("filter"), std::string::npos);
}

TEST_F(Cli, SynthReproducesGoldenFixture)
{
    const fs::path golden = fs::path(HLSVD_SOURCE_DIR) / "fixtures" / "au_3nm_noiseless.txt";
    ASSERT_EQ(run("synth --preset 3 --out " + path("preset3.txt")), 0);
    EXPECT_EQ(slurp(work_dir() / "preset3.txt"), slurp(golden));
    const fs::path config = fs::path(HLSVD_SOURCE_DIR) / "configs" / "au_3nm.json";
    ASSERT_EQ(run("synth --config \"" + config.string() + "\" --out " + path("config3.txt")), 0);
    EXPECT_EQ(slurp(work_dir() / "config3.txt"), slurp(golden));
}

TEST_F(Cli, NoiseReproducesFixture)
{
    const fs::path dir = fs::path(HLSVD_SOURCE_DIR) / "fixtures";
    ASSERT_EQ(run("noise --in \"" + (dir / "au_3nm_noiseless.txt").string() + "\" --out " + path("n3.txt") +
                  " --nsr 0.10 --seed 1"),
              0);
    EXPECT_EQ(slurp(work_dir() / "n3.txt"), slurp(dir / "au_3nm_nsr10.txt"));
}
