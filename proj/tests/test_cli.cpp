#include "support.hpp"

#include "lact/cli.hpp"
#include "lact/errors.hpp"
#include "lact/io.hpp"
#include "lact/json_io.hpp"
#include "lact/parallel.hpp"
#include "lact/phantom.hpp"
#include "lact/projector.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace lact;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "lact");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// 64 samples generated once and shared by the cases below.
const fs::path& generated()
{
    static const fs::path dir = [] {
        const auto d = test::scratch_dir("cli_gen") / "nested" / "set";
        const Result r = run({"generate", "--preset", "desk_small", "--count", "64", "--seed", "7", "--out", d.string()});
        REQUIRE(r.code == 0);
        return d;
    }();
    return dir;
}

} // namespace

TEST_CASE("range and level parsing")
{
    const AngularWindow w = cli::parse_range("12.5:52.5");
    CHECK(w.alpha_deg == 12.5);
    CHECK(w.beta_deg == 52.5);
    CHECK_THROWS_AS(cli::parse_range("10"), UsageError);
    CHECK_THROWS_AS(cli::parse_range("a:b"), UsageError);
    CHECK_THROWS_AS(cli::parse_range("50:10"), UsageError);

    CHECK(cli::parse_levels("1..7") == std::vector<int>{1, 2, 3, 4, 5, 6, 7});
    CHECK(cli::parse_levels("1,3,7") == std::vector<int>{1, 3, 7});
    CHECK(cli::parse_levels("1..3,7") == std::vector<int>{1, 2, 3, 7});
    CHECK_THROWS_AS(cli::parse_levels("0..3"), UsageError);
    CHECK_THROWS_AS(cli::parse_levels("8"), UsageError);
    CHECK_THROWS_AS(cli::parse_levels("x"), UsageError);
}

TEST_CASE("exit codes")
{
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"bogus"}).code == cli::kUsage);
    CHECK(run({"fbp", "--range", "0:90"}).code == cli::kUsage);
    CHECK(run({"--help"}).code == cli::kOk);

    const auto dir = test::scratch_dir("cli_codes");
    CHECK(run({"fbp", "--sino", (dir / "missing.lasg").string(), "--range", "0:90", "--out",
               (dir / "o.laim").string()})
              .code == cli::kData);
    const std::vector<std::uint8_t> junk{1, 2, 3};
    io::write_file_atomic(dir / "junk.lasg", junk);
    const Result bad = run({"fbp", "--sino", (dir / "junk.lasg").string(), "--range", "0:90", "--out",
                            (dir / "o.laim").string()});
    CHECK(bad.code == cli::kData);
    CHECK_FALSE(bad.err.empty());
    CHECK(run({"generate", "--out", (dir / "g").string(), "--count", "0"}).code == cli::kUsage);

#ifdef LACT_CLI
    const std::string exe = LACT_CLI;
    CHECK(WEXITSTATUS(std::system((exe + " bogus >/dev/null 2>&1").c_str())) == cli::kUsage);
    CHECK(WEXITSTATUS(std::system((exe + " --help >/dev/null 2>&1").c_str())) == cli::kOk);
#endif
}

TEST_CASE("generate writes a deterministic dataset")
{
    const fs::path& a = generated();
    int laim = 0, lasg = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        laim += e.path().extension() == ".laim";
        lasg += e.path().extension() == ".lasg";
    }
    CHECK(laim == 64);
    CHECK(lasg == 64);
    CHECK(fs::exists(a / "manifest.json"));

    const auto b = test::scratch_dir("cli_gen_b");
    REQUIRE(run({"generate", "--preset", "desk_small", "--count", "64", "--seed", "7", "--out", b.string()}).code == 0);
    for (int i : {0, 17, 63})
        CHECK(io::read_file(a / phantom::sample_name(i, "laim")) == io::read_file(b / phantom::sample_name(i, "laim")));
}

TEST_CASE("fbp subcommand")
{
    const fs::path& d = generated();
    const auto dir = test::scratch_dir("cli_fbp");
    const std::string sino = (d / phantom::sample_name(0, "lasg")).string();
    for (const std::string& range : {"0:360", "10:100", "45:75"}) {
        REQUIRE(run({"fbp", "--sino", sino, "--range", range, "--out", (dir / "r.laim").string()}).code == 0);
        CHECK(io::read_image(dir / "r.laim").size == 64);
    }
    CHECK(run({"fbp", "--sino", sino, "--range", "0:90", "--filter", "hann", "--out", (dir / "v.png").string()}).code == 0);
    CHECK(fs::file_size(dir / "v.png") > 0);
    CHECK(run({"fbp", "--sino", sino, "--range", "0:400", "--out", (dir / "r.laim").string()}).code == cli::kUsage);
    CHECK(run({"fbp", "--sino", sino, "--range", "0:90", "--filter", "x", "--out", (dir / "r.laim").string()}).code ==
          cli::kUsage);
}

TEST_CASE("fbp and eval: full scan recovers a disk, a short window does not")
{
    const auto gt = test::scratch_dir("cli_disk_gt"), pred = test::scratch_dir("cli_disk_pred");
    const auto g = FanBeamGeometry::desk();
    const Image disk = test::disk_image(g.image_size, 36.0);
    io::write_image(gt / phantom::sample_name(0, "laim"), disk);
    const std::string sino = (gt / "disk.lasg").string();
    io::write_sinogram(sino, forward_project(disk, g));
    auto score = [&](const std::string& range) {
        REQUIRE(run({"fbp", "--sino", sino, "--range", range, "--out", (pred / phantom::sample_name(0, "laim")).string()})
                    .code == 0);
        const auto csv = pred / "e.csv";
        REQUIRE(run({"eval", "--pred", pred.string(), "--gt", gt.string(), "--levels", "1", "--out", csv.string()}).code ==
                0);
        std::ifstream f(csv);
        std::string header, row;
        std::getline(f, header);
        std::getline(f, row);
        // level,range_deg,mcc_sum,...
        std::stringstream ss(row);
        std::string cell;
        for (int i = 0; i < 3; ++i)
            std::getline(ss, cell, ',');
        return std::stod(cell);
    };
    const double full = score("0:360"), narrow = score("0:30");
    MESSAGE("disk MCC full " << full << ", 30 deg " << narrow);
    CHECK(full >= 0.95);
    CHECK(narrow < full - 0.2);
}

TEST_CASE("eval of identical predictions scores one per sample")
{
    const auto gt = test::scratch_dir("cli_eval_gt"), pred = test::scratch_dir("cli_eval_pred");
    for (int i = 0; i < 3; ++i) {
        const Image img = test::disk_image(32, 6.0 + 2 * i);
        io::write_image(gt / phantom::sample_name(i, "laim"), img);
        io::write_image(pred / phantom::sample_name(i, "laim"), img);
    }
    const auto csv = test::scratch_dir("cli_eval_out") / "sub" / "e.csv";
    const Result r = run({"eval", "--pred", pred.string(), "--gt", gt.string(), "--levels", "1,7", "--out", csv.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("mcc_sum 3") != std::string::npos);
    CHECK(fs::exists(csv));

    // A level-specific prediction overrides the shared one.
    io::write_image(pred / "sample_000000_level7.laim", Image(32));
    const Result r7 = run({"eval", "--pred", pred.string(), "--gt", gt.string(), "--levels", "7"});
    REQUIRE(r7.code == 0);
    CHECK(r7.out.find("mcc_sum 2") != std::string::npos);

    CHECK(run({"eval", "--pred", pred.string()}).code == cli::kUsage);
    CHECK(run({"eval", "--data", gt.string()}).code == cli::kUsage);
}

TEST_CASE("train, reconstruct and eval end to end")
{
    const fs::path& d = generated();
    const auto dir = test::scratch_dir("cli_train");
    const std::string ckpt = (dir / "m.ckpt").string();
    const Result t = run({"train", "--dataset", d.string(), "--out", ckpt, "--epochs", "2", "--batch-size", "8",
                          "--lr", "1e-3", "--holdout", "4", "--seed", "3", "--log", (dir / "log.csv").string(),
                          "--eval-every", "1", "--eval-csv", (dir / "eval.csv").string()});
    REQUIRE(t.code == 0);
    CHECK(fs::exists(ckpt));
    CHECK(fs::exists(dir / "log.csv"));
    CHECK(fs::exists(dir / "eval.csv"));

    const std::string sino = (d / phantom::sample_name(62, "lasg")).string();
    REQUIRE(run({"reconstruct", "--ckpt", ckpt, "--sino", sino, "--range", "20:60", "--out",
                 (dir / "rec.laim").string()})
                .code == 0);
    CHECK(io::read_image(dir / "rec.laim").size == 64);

    const Result e = run({"eval", "--data", d.string(), "--ckpt", ckpt, "--holdout", "4", "--levels", "1..7",
                          "--metrics", (dir / "m.csv").string()});
    REQUIRE(e.code == 0);
    CHECK(std::count(e.out.begin(), e.out.end(), '\n') == 7);

    const Result s = run({"sweep", "--kind", "level", "--data", d.string(), "--fbp", "--holdout", "4", "--out",
                          (dir / "s.csv").string()});
    CHECK(s.code == 0);
    CHECK(fs::exists(dir / "s.csv"));

    CHECK(run({"reconstruct", "--ckpt", (dir / "log.csv").string(), "--sino", sino, "--range", "20:60", "--out",
               (dir / "x.laim").string()})
              .code == cli::kData);
}

TEST_CASE("print-config and thread selection")
{
    const auto dir = test::scratch_dir("cli_cfg");
    const Result r = run({"train", "--dataset", generated().string(), "--out", (dir / "m.ckpt").string(), "--epochs",
                          "3", "--fixed-range", "40", "--print-config"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j.at("epochs") == 3);
    CHECK(j.at("fixed_range") == 40.0);
    CHECK_FALSE(fs::exists(dir / "m.ckpt"));

    setenv("LACT_THREADS", "1", 1);
    CHECK(run({"generate", "--out", (dir / "g").string(), "--print-config"}).code == 0);
    CHECK(parallel::num_threads() == 1);
    CHECK(run({"generate", "--out", (dir / "g").string(), "--threads", "3", "--print-config"}).code == 0);
    CHECK(parallel::num_threads() == 3);
    setenv("LACT_THREADS", "zero", 1);
    CHECK(run({"generate", "--out", (dir / "g").string(), "--print-config"}).code == cli::kUsage);
    unsetenv("LACT_THREADS");
    CHECK_FALSE(fs::exists(dir / "g"));
}
