#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

const std::string kCli = BCSINET_CLI_PATH;

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "bcsinet_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt";
    const fs::path err = work_dir() / "stderr.txt";
    const std::string cmd =
        kCli + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

int count_lines(const fs::path& p) {
    std::ifstream is(p);
    int n = 0;
    std::string line;
    while (std::getline(is, line)) ++n;
    return n;
}

const std::string kTinyGen = "--na 8 --nt 8 --nc 64 --scale 0.0001";
const std::string kTinySpec = "--na 8 --nt 8";

std::string data_dir() {
    static std::string dir = [] {
        const fs::path d = work_dir() / "data";
        RunResult r = run("gen-data --seed 7 --out " + d.string() + " " + kTinyGen);
        REQUIRE(r.code == 0);
        return d.string();
    }();
    return dir;
}

}  // namespace

TEST_CASE("help and missing subcommand") {
    CHECK(run("--help").code == 0);
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
}

TEST_CASE("gen-data writes three deterministic splits") {
    const std::string d1 = data_dir();
    CHECK(fs::exists(fs::path(d1) / "train.bin"));
    CHECK(fs::exists(fs::path(d1) / "val.bin"));
    CHECK(fs::exists(fs::path(d1) / "test.bin"));

    const fs::path d2 = work_dir() / "data2";
    RunResult r = run("gen-data --seed 7 --out " + d2.string() + " " + kTinyGen);
    CHECK(r.code == 0);
    CHECK(r.out.find("wrote 10/3/2 samples") != std::string::npos);
    CHECK(slurp(fs::path(d1) / "train.bin") == slurp(d2 / "train.bin"));
    CHECK(slurp(fs::path(d1) / "test.bin") == slurp(d2 / "test.bin"));

    // a different seed changes the payload
    const fs::path d3 = work_dir() / "data3";
    CHECK(run("gen-data --seed 8 --out " + d3.string() + " " + kTinyGen).code == 0);
    CHECK(slurp(fs::path(d1) / "train.bin") != slurp(d3 / "train.bin"));
}

TEST_CASE("gen-data argument errors exit with code 2") {
    CHECK(run("gen-data " + kTinyGen).code == 2);  // --out is required
    CHECK(run("gen-data --out " + (work_dir() / "x").string() + " --scale 0.000001").code == 2);
}

TEST_CASE("train writes metrics, checkpoints and an NMSE line") {
    const fs::path out = work_dir() / "run1";
    RunResult r = run("train " + kTinySpec + " --data " + data_dir() + " --out " + out.string() +
                      " --epochs 3 --warmup 1 --batch 8 --max-reboots 0 --seed 3");
    CHECK(r.code == 0);
    CHECK(r.out.find("training BCsiNet-A2 for 3 epochs") != std::string::npos);
    CHECK(r.out.find("NMSE: ") != std::string::npos);
    CHECK(r.out.find(" dB") != std::string::npos);
    CHECK(fs::exists(out / "model.ckpt"));
    CHECK(fs::exists(out / "last.ckpt"));
    CHECK(count_lines(out / "metrics.jsonl") == 3);
    CHECK(slurp(out / "metrics.jsonl").find("\"epoch\":0") != std::string::npos);
}

TEST_CASE("train resumes from a checkpoint with continued epoch numbering") {
    const fs::path out = work_dir() / "run2";
    REQUIRE(run("train " + kTinySpec + " --data " + data_dir() + " --out " + out.string() +
                " --epochs 2 --warmup 1 --batch 8 --max-reboots 0 --seed 3")
                .code == 0);
    const fs::path out2 = work_dir() / "run2_resumed";
    RunResult r = run("train " + kTinySpec + " --data " + data_dir() + " --out " +
                      out2.string() + " --epochs 4 --warmup 1 --batch 8 --max-reboots 0" +
                      " --seed 3 --resume " + (out / "last.ckpt").string());
    CHECK(r.code == 0);
    CHECK(count_lines(out2 / "metrics.jsonl") == 2);
    const std::string metrics = slurp(out2 / "metrics.jsonl");
    CHECK(metrics.find("\"epoch\":2") != std::string::npos);
    CHECK(metrics.find("\"epoch\":3") != std::string::npos);
    CHECK(metrics.find("\"epoch\":0") == std::string::npos);

    // resuming a different variant is rejected
    RunResult bad = run("train --head B " + kTinySpec + " --data " + data_dir() + " --out " +
                        (work_dir() / "run2_bad").string() +
                        " --epochs 4 --warmup 1 --batch 8 --resume " +
                        (out / "last.ckpt").string());
    CHECK(bad.code == 2);
    CHECK(bad.err.find("different variant") != std::string::npos);
}

TEST_CASE("eval requires exactly one model source and prints the NMSE format") {
    const fs::path out = work_dir() / "run1";
    const std::string test_bin = data_dir() + "/test.bin";
    RunResult r = run("eval --ckpt " + (out / "model.ckpt").string() + " --data " + test_bin);
    CHECK(r.code == 0);
    // "NMSE: <value> dB" with two decimals
    CHECK(r.out.find("NMSE: ") != std::string::npos);
    const size_t dot = r.out.find('.', r.out.find("NMSE: "));
    REQUIRE(dot != std::string::npos);
    CHECK(r.out.substr(dot + 3, 3) == " dB");

    CHECK(run("eval --data " + test_bin).code == 2);
    CHECK(run("eval --ckpt a --deployed b --data " + test_bin).code == 2);
    // missing files are I/O errors, not usage errors
    CHECK(run("eval --ckpt /nonexistent.ckpt --data " + test_bin).code == 3);

    // normalized-scale NMSE differs in general but still prints
    RunResult rn = run("eval --normalized --ckpt " + (out / "model.ckpt").string() + " --data " +
                       test_bin);
    CHECK(rn.code == 0);
    CHECK(rn.out.find("NMSE: ") != std::string::npos);
}

TEST_CASE("export produces a deployed model that evaluates like the checkpoint") {
    const fs::path out = work_dir() / "run1";
    const fs::path model = work_dir() / "deployed.bin";
    RunResult r = run("export --ckpt " + (out / "model.ckpt").string() + " --out " +
                      model.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(model));

    const std::string test_bin = data_dir() + "/test.bin";
    RunResult a = run("eval --ckpt " + (out / "model.ckpt").string() + " --data " + test_bin);
    RunResult b = run("eval --deployed " + model.string() + " --data " + test_bin);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(a.out.substr(a.out.find("NMSE:")) == b.out.substr(b.out.find("NMSE:")));
}

TEST_CASE("analyze prints tables and writes files") {
    RunResult r = run("analyze");
    CHECK(r.code == 0);
    CHECK(r.out.find("CsiNet") != std::string::npos);

    RunResult csv = run("analyze --table tab4 --csv");
    CHECK(csv.code == 0);
    CHECK(csv.out.find("1/4,CsiNet,1085K,1049K") != std::string::npos);

    const fs::path f = work_dir() / "tab2.txt";
    RunResult w = run("analyze --table tab2 --out " + f.string());
    CHECK(w.code == 0);
    CHECK(slurp(f).find("96.60%") != std::string::npos);

    CHECK(run("analyze --table tab9").code == 2);
}

TEST_CASE("bench reports kernel timings") {
    RunResult r = run("bench " + kTinySpec + " --iters 50 --runs 2");
    CHECK(r.code == 0);
    CHECK(r.out.find("shape: 32 x 128") != std::string::npos);
    CHECK(r.out.find("multiplications per inference: binary 32, dense 4096") !=
          std::string::npos);
    CHECK(r.out.find("speedup: ") != std::string::npos);
}

TEST_CASE("invalid model configuration exits with code 2") {
    CHECK(run("train --eta 0.3 --data " + data_dir() + " --out " +
              (work_dir() / "bad").string())
              .code == 2);
    CHECK(run("train --family csinet --head B --data " + data_dir() + " --out " +
              (work_dir() / "bad").string())
              .code == 2);
    CHECK(run("bench --refinenets 9").code == 2);
}

TEST_CASE("missing dataset directory exits with code 3") {
    CHECK(run("train " + kTinySpec + " --data /nonexistent_dir --out " +
              (work_dir() / "bad2").string() + " --epochs 2 --warmup 1")
              .code == 3);
}
