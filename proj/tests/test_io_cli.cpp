#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stcr/cli.hpp"
#include "stcr/config.hpp"
#include "stcr/io.hpp"
#include "stcr/model.hpp"
#include "stcr/synthetic.hpp"
#include "stcr/transform.hpp"
#include "stcr/viz.hpp"
#include "test_util.hpp"

using namespace stcr;
using stcr::testing::random_clip;
using stcr::testing::temp_dir;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& bytes) {
  std::ofstream(path, std::ios::binary) << bytes;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

VideoClip float32_clip(Index c, Index t, Index h, Index w, Rng& rng) {
  VideoClip clip = random_clip(c, t, h, w, rng);
  for (auto& v : clip.tensor().values()) v = static_cast<float>(v);
  return clip;
}

}  // namespace

TEST_SUITE("clip files") {
  TEST_CASE("round trip is bit-exact") {
    const std::string dir = temp_dir("clip_roundtrip");
    Rng rng(1);
    const VideoClip clip = float32_clip(3, 4, 5, 6, rng);
    write_clip(dir + "/a.vclp", clip);
    CHECK(read_clip(dir + "/a.vclp") == clip);
    CHECK(std::filesystem::file_size(dir + "/a.vclp") == 24 + clip_payload_bytes(3, 4, 5, 6));
  }

  TEST_CASE("payload size arithmetic") { CHECK(clip_payload_bytes(3, 16, 112, 112) == 2408448u); }

  TEST_CASE("truncation, bad magic and bad version report offsets") {
    const std::string dir = temp_dir("clip_errors");
    Rng rng(2);
    write_clip(dir + "/a.vclp", float32_clip(1, 2, 2, 2, rng));
    const std::string bytes = slurp(dir + "/a.vclp");
    REQUIRE(bytes.size() == 24 + 32);

    spit(dir + "/trunc.vclp", bytes.substr(0, 40));
    try {
      read_clip(dir + "/trunc.vclp");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 40);
    }

    std::string magic = bytes;
    magic[0] = 'X';
    spit(dir + "/magic.vclp", magic);
    try {
      read_clip(dir + "/magic.vclp");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 0);
    }

    std::string version = bytes;
    version[4] = 2;
    spit(dir + "/version.vclp", version);
    try {
      read_clip(dir + "/version.vclp");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(e.offset() == 4);
    }

    spit(dir + "/extra.vclp", bytes + "x");
    CHECK_THROWS_AS(read_clip(dir + "/extra.vclp"), FormatError);
    CHECK_THROWS_AS(read_clip(dir + "/missing.vclp"), IoError);
  }

  TEST_CASE("manifest round trip") {
    const std::string dir = temp_dir("manifest");
    const std::vector<ManifestEntry> entries{{"a.vclp", 0}, {"sub/b.vclp", 5}};
    write_manifest(dir + "/m.tsv", entries);
    CHECK(slurp(dir + "/m.tsv") == "a.vclp\t0\nsub/b.vclp\t5\n");
    const Manifest m = read_manifest(dir + "/m.tsv");
    REQUIRE(m.entries.size() == 2);
    CHECK(m.entries[1].path == "sub/b.vclp");
    CHECK(m.entries[1].label == 5);
    CHECK(m.resolve(m.entries[0]) == (std::filesystem::path(dir) / "a.vclp").string());
    spit(dir + "/bad.tsv", "a.vclp\tseven\n");
    CHECK_THROWS_AS(read_manifest(dir + "/bad.tsv"), FormatError);
  }
}

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip and validation") {
    const std::string dir = temp_dir("checkpoint");
    BackboneConfig config;
    Rng rng(3);
    const ModelParams params = init_params(config, rng);
    save_checkpoint(dir + "/m.ckpt", params);
    CHECK(load_checkpoint(dir + "/m.ckpt", config) == params);
    CHECK(slurp(dir + "/m.ckpt").substr(0, 4) == "STCR");

    BackboneConfig wider = config;
    wider.channels = {8, 24};
    CHECK_THROWS_AS(load_checkpoint(dir + "/m.ckpt", wider), FormatError);
    const std::string bytes = slurp(dir + "/m.ckpt");
    spit(dir + "/short.ckpt", bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(load_checkpoint(dir + "/short.ckpt", config), FormatError);
  }
}

TEST_SUITE("synthetic") {
  TEST_CASE("empty dataset") {
    const std::string dir = temp_dir("synthetic_empty");
    SyntheticSpec spec;
    spec.num_clips = 0;
    CHECK(gen_synthetic(spec, dir).entries.empty());
    CHECK(slurp(dir + "/manifest.tsv").empty());
    int files = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
    CHECK(files == 1);
  }

  TEST_CASE("generated files match in-memory clips") {
    const std::string dir = temp_dir("synthetic_files");
    SyntheticSpec spec;
    spec.num_clips = 7;
    const Manifest m = gen_synthetic(spec, dir);
    const auto data = load_dataset(read_manifest(dir + "/manifest.tsv"));
    REQUIRE(data.size() == 7);
    for (int i = 0; i < 7; ++i) {
      const LabeledClip expected = synthesize_clip(spec, i);
      CHECK(data[static_cast<std::size_t>(i)].clip == expected.clip);
      CHECK(data[static_cast<std::size_t>(i)].label == i % 6);
    }
  }

  TEST_CASE("a single frame does not reveal the direction") {
    SyntheticSpec spec;
    std::vector<double> mean_r, mean_l, spread_r, spread_l, max_r, max_l;
    for (int i = 0; i < 600; ++i) {
      const LabeledClip lc = synthesize_clip(spec, i);
      if (lc.label > 1) continue;
      const VideoClip& c = lc.clip;
      Eigen::Map<const VectorXd> frame0(c.tensor().data().data(), c.frame_size());  // channel 0, frame 0
      const double m = frame0.mean();
      const double sd = std::sqrt((frame0.array() - m).square().mean());
      (lc.label == 0 ? mean_r : mean_l).push_back(m);
      (lc.label == 0 ? spread_r : spread_l).push_back(sd);
      (lc.label == 0 ? max_r : max_l).push_back(frame0.maxCoeff());
    }
    REQUIRE(mean_r.size() == 100);
    REQUIRE(mean_l.size() == 100);
    CHECK(stcr::testing::ks_two_sample(mean_r, mean_l).p_value > 0.01);
    CHECK(stcr::testing::ks_two_sample(spread_r, spread_l).p_value > 0.01);
    CHECK(stcr::testing::ks_two_sample(max_r, max_l).p_value > 0.01);
  }

  TEST_CASE("reversed right motion is left motion") {
    SyntheticSpec spec;
    Rng rng(4);
    MotionSample right;
    right.motion = Motion::TranslateRight;
    right.start_h = 3;
    right.start_w = 5;
    right.texture = stcr::testing::random_tensor(Shape{3, 4, 4}, rng, 0.5, 1.5);
    MotionSample left = right;
    left.motion = Motion::TranslateLeft;
    left.start_w = right.start_w + spec.speed * (spec.shape[1] - 1);
    const VideoClip r = render_motion(spec, right, rng);
    const VideoClip l = render_motion(spec, left, rng);
    CHECK(stt_apply_clip(r.tensor(), {Flip::Temporal, Rotation::R0}) == l.tensor());
  }

  TEST_CASE("orbits close after one clip and go opposite ways") {
    SyntheticSpec spec;
    for (double phase : {0.0, 1.0, 2.5}) {
      CHECK(motion_offset(spec, Motion::Clockwise, phase, 0) == std::pair<Index, Index>{0, 0});
      CHECK(motion_offset(spec, Motion::Clockwise, phase, 2) != motion_offset(spec, Motion::CounterClockwise, phase, 2));
    }
    CHECK(parse_motion(to_string(Motion::Clockwise)) == Motion::Clockwise);
    CHECK_THROWS_AS(parse_motion("spin"), ConfigError);
  }
}

TEST_SUITE("viz") {
  TEST_CASE("consistency matrix shape and identity row") {
    BackboneConfig config;
    Rng rng(5);
    const ModelParams params = init_params(config, rng);
    const VideoClip clip = random_clip(3, 8, 12, 12, rng);
    const RowMatrixXd m = consistency_matrix(config, params, clip);
    CHECK(m.rows() == 16);
    CHECK(m.cols() == config.feature_frames());
    const Tensor d = psi_pool(backbone_forward(config, params, clip))->value;
    for (Index t = 0; t < m.cols(); ++t) {
      double mean = 0.0;
      for (Index c = 0; c < d.dim(0); ++c) mean += d[c * d.dim(1) + t];
      CHECK(m(0, t) == doctest::Approx(mean / static_cast<double>(d.dim(0))).epsilon(1e-15));
    }
  }

  TEST_CASE("pointwise backbone gives equal spatial rows") {
    BackboneConfig config;
    config.channels = {5};
    config.kernel = {1, 1, 1};
    config.padding = {0, 0, 0};
    config.strides = {{1, 1, 1}};
    config.input_shape = {3, 4, 6, 6};
    Rng rng(6);
    const ModelParams params = init_params(config, rng);
    const RowMatrixXd m = consistency_matrix(config, params, random_clip(3, 4, 6, 6, rng));
    for (Index i = 1; i < 8; ++i) CHECK(m.row(i) == m.row(0));
    CHECK(temporal_flip_gap(m) == 0.0);
  }

  TEST_CASE("csv layout") {
    const std::string dir = temp_dir("viz_csv");
    RowMatrixXd m = RowMatrixXd::Zero(16, 3);
    m(9, 2) = 0.25;
    write_consistency_csv(dir + "/m.csv", m);
    const auto lines = lines_of(slurp(dir + "/m.csv"));
    REQUIRE(lines.size() == 17);
    CHECK(lines[0] == "index,flip,rotation,t0,t1,t2");
    CHECK(lines[10] == "9,2,1,0,0,0.25");
  }

  TEST_CASE("heatmap rules") {
    const ByteImage flat = heatmap_from_feature(Tensor(Shape{2, 3, 4, 4}, 0.3), 8, 8);
    CHECK(flat.rows() == 8);
    CHECK(flat.cols() == 8);
    CHECK((flat.array() == 128).all());

    Tensor f(Shape{3, 2, 4, 4});
    for (Index c = 0; c < 3; ++c) f.at(c, 1, 2, 1) = 1.0;
    const ByteImage img = heatmap_from_feature(f, 16, 16);
    for (Index y = 0; y < 16; ++y)
      for (Index x = 0; x < 16; ++x) {
        const bool in_block = y / 4 == 2 && x / 4 == 1;
        CHECK(img(y, x) == (in_block ? 255 : 0));
      }
  }

  TEST_CASE("pgm output") {
    const std::string dir = temp_dir("viz_pgm");
    ByteImage img(2, 3);
    img << 0, 1, 2, 3, 4, 255;
    write_pgm(dir + "/a.pgm", img);
    CHECK(slurp(dir + "/a.pgm") == std::string("P5\n3 2\n255\n") + std::string("\x00\x01\x02\x03\x04\xff", 6));

    BackboneConfig config;
    Rng rng(7);
    const ByteImage h = viz_heatmap(config, init_params(config, rng), random_clip(3, 8, 12, 12, rng), dir + "/h.pgm");
    CHECK(h.rows() == 12);
    CHECK(h.cols() == 12);
  }
}

TEST_SUITE("config") {
  TEST_CASE("defaults and overrides") {
    const AppConfig empty = parse_config("{}");
    CHECK(empty.train.learning_rate == 0.01);
    CHECK(empty.model.channels == std::vector<Index>{8, 16});
    const AppConfig c = parse_config(R"({"train": {"epochs": 3, "variant": "cutmix"}, "data": {"num_clips": 12,
        "classes": ["translate-up", "translate-down"]}, "eval": {"retrieval_k": 2}})");
    CHECK(c.train.epochs == 3);
    CHECK(c.train.variant == MixVariant::CutMix);
    CHECK(c.data.num_clips == 12);
    CHECK(c.data.classes.size() == 2);
    CHECK(c.eval.retrieval_k == 2);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(parse_config(R"({"train": {"epoch": 3}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"extra": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    // cross-section checks run after flag overrides, so parsing alone accepts this
    const AppConfig mismatched = parse_config(R"({"train": {"crop": [8, 10, 10]}})");
    CHECK_THROWS_AS(mismatched.validate(), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"epochs": "ten"}})"), ConfigError);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 1") {
    CHECK(cli({}).code == 1);
    CHECK(cli({"frobnicate"}).code == 1);
    const CliRun r = cli({"gradcheck", "--bogus"});
    CHECK(r.code == 1);
    CHECK_FALSE(r.err.empty());
  }

  TEST_CASE("runtime errors exit 2") {
    const std::string dir = temp_dir("cli_runtime");
    CHECK(cli({"viz-matrix", "--clip", dir + "/missing.vclp", "--out", dir + "/m.csv"}).code == 2);
    spit(dir + "/bad.json", "{\"nope\": 1}");
    CHECK(cli({"gen-data", "--config", dir + "/bad.json", "--out", dir + "/data"}).code == 2);
  }

  TEST_CASE("gradcheck seed 7") {
    const CliRun r = cli({"gradcheck", "--seed", "7"});
    CHECK(r.code == 0);
    CHECK(r.out.find("max relative error") != std::string::npos);
  }

  TEST_CASE("zero-epoch pretrain and viz commands") {
    const std::string dir = temp_dir("cli_pipeline");
    spit(dir + "/c.json", R"({"data": {"num_clips": 6}, "train": {"batch_size": 3}})");
    REQUIRE(cli({"gen-data", "--config", dir + "/c.json", "--out", dir + "/data"}).code == 0);
    const CliRun p = cli({"pretrain", "--config", dir + "/c.json", "--manifest", dir + "/data/manifest.tsv",
                          "--checkpoint", dir + "/m.ckpt", "--log", dir + "/log.csv", "--epochs", "0"});
    CHECK(p.code == 0);
    CHECK(std::filesystem::exists(dir + "/m.ckpt"));
    const auto log = lines_of(slurp(dir + "/log.csv"));
    REQUIRE(log.size() == 1);
    CHECK(log[0] == "step,epoch,lr,l_tw,l_cw,total,gamma,collapse_metric,variant,lambda,k");

    const CliRun v = cli({"viz-matrix", "--config", dir + "/c.json", "--checkpoint", dir + "/m.ckpt", "--clip",
                          dir + "/data/clip_00000.vclp", "--out", dir + "/matrix.csv"});
    CHECK(v.code == 0);
    CHECK(lines_of(slurp(dir + "/matrix.csv")).size() == 17);

    const CliRun h = cli({"viz-heatmap", "--config", dir + "/c.json", "--checkpoint", dir + "/m.ckpt", "--clip",
                          dir + "/data/clip_00001.vclp", "--out", dir + "/h.pgm"});
    CHECK(h.code == 0);
    CHECK(slurp(dir + "/h.pgm").substr(0, 3) == "P5\n");

    const CliRun one = cli({"pretrain", "--config", dir + "/c.json", "--manifest", dir + "/data/manifest.tsv",
                            "--checkpoint", dir + "/m1.ckpt", "--log", dir + "/log1.csv", "--epochs", "1"});
    CHECK(one.code == 0);
    const auto rows = lines_of(slurp(dir + "/log1.csv"));
    CHECK(rows.size() == 3);
    CHECK(rows[1].find(",intra,") != std::string::npos);

    const CliRun probe = cli({"probe", "--config", dir + "/c.json", "--train-manifest", dir + "/data/manifest.tsv",
                              "--test-manifest", dir + "/data/manifest.tsv", "--checkpoint", dir + "/m1.ckpt",
                              "--out", dir + "/eval.csv"});
    CHECK(probe.code == 0);
    const auto eval = lines_of(slurp(dir + "/eval.csv"));
    REQUIRE(eval.size() == 3);
    CHECK(eval[0] == "metric,value");
    CHECK(eval[1].rfind("linear_probe_accuracy,", 0) == 0);

    const CliRun ret = cli({"retrieve", "--config", dir + "/c.json", "--query-manifest", dir + "/data/manifest.tsv",
                            "--checkpoint", dir + "/m1.ckpt", "--out", dir + "/ret.csv"});
    CHECK(ret.code == 0);
  }

  TEST_CASE("binary entry point") {
    const std::string cmd = std::string(STCR_CLI_PATH) + " gradcheck --seed 7 > /dev/null";
    CHECK(std::system(cmd.c_str()) == 0);
    const std::string bad = std::string(STCR_CLI_PATH) + " nonsense 2> /dev/null";
    const int status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(status) == 1);
  }
}
