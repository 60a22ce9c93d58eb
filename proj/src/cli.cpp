#include "stcr/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "stcr/evaluate.hpp"
#include "stcr/io.hpp"
#include "stcr/viz.hpp"

namespace stcr {

GradCheckReport siamese_gradcheck(const BackboneConfig& model, const TrainConfig& train, std::uint64_t seed,
                                  double eps) {
  model.validate();
  Rng rng = derive_rng(seed);
  const ModelParams params = init_params(model, rng);

  const Shape& in = model.input_shape;
  VideoClip video(in[0], in[1], in[2] + 4, in[3] + 4);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : video.tensor().values()) v = normal(rng);

  auto [x_clean, x_noise] = double_crop(video, {in[1], in[2], in[3]}, rng);
  const TransformId t = stt_sample(rng);
  const Augmented noisy = intra_video_mixup(VideoClip(stt_apply_clip(x_noise.tensor(), t)), train.alpha, rng);
  const Var clean = constant(x_clean.tensor());
  const Var noise = constant(noisy.clip.tensor());

  const Objective objective = [&](const Var& flat) {
    return siamese_loss(model, bind_flat(params, flat), clean, noise, t, train.gamma).total;
  };
  return finite_diff_report(objective, params.flatten(), eps);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

struct Overrides {
  std::optional<int> epochs, batch_size, num_clips, k;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  std::optional<std::string> variant;
};

AppConfig resolve_config(const std::string& path, const Overrides& o) {
  AppConfig config = path.empty() ? AppConfig{} : load_config(path);
  if (o.epochs) config.train.epochs = *o.epochs;
  if (o.batch_size) config.train.batch_size = *o.batch_size;
  if (o.lr) config.train.learning_rate = *o.lr;
  if (o.variant) config.train.variant = parse_mix_variant(*o.variant);
  if (o.seed) {
    config.train.seed = *o.seed;
    config.data.seed = *o.seed;
  }
  if (o.num_clips) config.data.num_clips = *o.num_clips;
  if (o.k) config.eval.retrieval_k = *o.k;
  config.validate();
  return config;
}

ModelParams model_from(const AppConfig& config, const std::string& checkpoint) {
  if (!checkpoint.empty()) return load_checkpoint(checkpoint, config.model);
  Rng rng = derive_rng(config.train.seed, {0x1417});
  return init_params(config.model, rng);
}

VideoClip model_input(const AppConfig& config, const std::string& clip_path) {
  const VideoClip clip = read_clip(clip_path);
  const Shape& in = config.model.input_shape;
  if (clip.shape() == in) return clip;
  if (clip.channels() != in[0]) throw DimensionError("clip channels do not match model.input_shape");
  return center_crop(clip, {in[1], in[2], in[3]});
}

std::vector<VideoClip> videos_of(const std::vector<LabeledClip>& data) {
  std::vector<VideoClip> videos;
  videos.reserve(data.size());
  for (const auto& d : data) videos.push_back(d.clip);
  return videos;
}

void write_features_csv(const std::string& path, const FeatureSet& set) {
  auto out = open_out(path);
  out << "label";
  for (Index j = 0; j < set.features.cols(); ++j) out << ",f" << j;
  out << '\n';
  for (Index i = 0; i < set.features.rows(); ++i) {
    out << set.labels[static_cast<std::size_t>(i)];
    for (Index j = 0; j < set.features.cols(); ++j) out << ',' << fmt(set.features(i, j));
    out << '\n';
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatio-temporal consistency regularization toolkit"};
  app.require_subcommand(1);

  std::string config_path, manifest, test_manifest, checkpoint, init_checkpoint, log_path, out_path, clip_path,
      out_dir, features_out, gallery_manifest;
  Overrides o;
  double eps = 1e-5;
  bool random_init = false;

  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config_path, "JSON configuration document"); };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "Override every seed"); };

  auto* gen = app.add_subcommand("gen-data", "Render the synthetic moving-square dataset");
  add_config(gen);
  add_seed(gen);
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_option("--num-clips", o.num_clips, "Override data.num_clips");

  auto* pretrain = app.add_subcommand("pretrain", "Siamese consistency pretraining");
  add_config(pretrain);
  add_seed(pretrain);
  pretrain->add_option("--manifest", manifest, "Training manifest")->required();
  pretrain->add_option("--checkpoint", checkpoint, "Checkpoint to write")->required();
  pretrain->add_option("--log", log_path, "Loss CSV to write")->required();
  pretrain->add_option("--init-checkpoint", init_checkpoint, "Start from these weights");
  pretrain->add_option("--epochs", o.epochs, "Override train.epochs");
  pretrain->add_option("--batch-size", o.batch_size, "Override train.batch_size");
  pretrain->add_option("--lr", o.lr, "Override train.learning_rate");
  pretrain->add_option("--variant", o.variant, "intra|inter|video_mixup|cutmix|gaussian_noise");

  auto* probe = app.add_subcommand("probe", "Linear probe and retrieval on frozen features");
  add_config(probe);
  add_seed(probe);
  probe->add_option("--train-manifest", manifest, "Manifest the probe is fitted on")->required();
  probe->add_option("--test-manifest", test_manifest, "Manifest the probe is scored on")->required();
  probe->add_option("--checkpoint", checkpoint, "Frozen weights (omit for random initialization)");
  probe->add_flag("--random-init", random_init, "Ignore --checkpoint and use freshly initialized weights");
  probe->add_option("--out", out_path, "Evaluation CSV (metric,value)")->required();
  probe->add_option("--features-out", features_out, "Also dump raw test features as CSV");

  auto* retrieve = app.add_subcommand("retrieve", "Nearest-neighbour clip retrieval");
  add_config(retrieve);
  retrieve->add_option("--query-manifest", manifest, "Query clips")->required();
  retrieve->add_option("--gallery-manifest", gallery_manifest, "Gallery clips (default: queries, self excluded)");
  retrieve->add_option("--checkpoint", checkpoint, "Frozen weights");
  retrieve->add_option("--k", o.k, "Override eval.retrieval_k");
  retrieve->add_option("--out", out_path, "Evaluation CSV (metric,value)")->required();

  auto* viz_matrix = app.add_subcommand("viz-matrix", "16 x T' transform consistency matrix");
  add_config(viz_matrix);
  viz_matrix->add_option("--checkpoint", checkpoint, "Weights (omit for random initialization)");
  viz_matrix->add_option("--clip", clip_path, "Clip file")->required();
  viz_matrix->add_option("--out", out_path, "CSV to write")->required();

  auto* viz_heat = app.add_subcommand("viz-heatmap", "Temporal-max activation heatmap");
  add_config(viz_heat);
  viz_heat->add_option("--checkpoint", checkpoint, "Weights (omit for random initialization)");
  viz_heat->add_option("--clip", clip_path, "Clip file")->required();
  viz_heat->add_option("--out", out_path, "PGM to write")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the full loss");
  add_config(gradcheck);
  add_seed(gradcheck);
  gradcheck->add_option("--eps", eps, "Central-difference step");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    const AppConfig config = resolve_config(config_path, o);

    if (*gen) {
      const Manifest m = gen_synthetic(config.data, out_dir);
      out << "wrote " << m.entries.size() << " clips to " << out_dir << '\n';
    } else if (*pretrain) {
      const auto data = load_dataset(read_manifest(manifest));
      const ModelParams init = model_from(config, init_checkpoint);
      auto log = open_out(log_path);
      log << "step,epoch,lr,l_tw,l_cw,total,gamma,collapse_metric,variant,lambda,k\n";
      const auto videos = videos_of(data);
      const TrainState final_state = run_pretraining(
          videos, config.model, config.train, TrainState::fresh(init), [&](const TrainLogRow& row) {
            log << row.step << ',' << row.epoch << ',' << fmt(row.lr) << ',' << fmt(row.report.l_tw) << ','
                << fmt(row.report.l_cw) << ',' << fmt(row.report.total) << ',' << fmt(row.report.gamma) << ','
                << fmt(row.collapse) << ',' << to_string(row.record.variant) << ',' << fmt(row.record.lambda) << ','
                << row.record.source_frame_index << '\n';
          });
      if (!log) throw IoError("write failed for " + log_path);
      save_checkpoint(checkpoint, final_state.params);
      out << "trained " << final_state.step << " steps; checkpoint " << checkpoint << '\n';
    } else if (*probe) {
      const ModelParams params = model_from(config, random_init ? std::string() : checkpoint);
      const auto train_data = load_dataset(read_manifest(manifest));
      const auto test_data = load_dataset(read_manifest(test_manifest));
      const FeatureSet train_f = extract_features(config.model, params, train_data);
      const FeatureSet test_f = extract_features(config.model, params, test_data);
      const double accuracy = linear_probe(train_f, test_f, config.eval.probe_epochs, config.eval.probe_lr);
      const double recall = retrieval_eval(test_f, train_f, config.eval.retrieval_k);
      auto csv = open_out(out_path);
      csv << "metric,value\n"
          << "linear_probe_accuracy," << fmt(accuracy) << '\n'
          << "retrieval_recall_at_" << config.eval.retrieval_k << ',' << fmt(recall) << '\n';
      if (!features_out.empty()) write_features_csv(features_out, test_f);
      out << "linear probe accuracy " << accuracy << ", recall@" << config.eval.retrieval_k << ' ' << recall << '\n';
    } else if (*retrieve) {
      const ModelParams params = model_from(config, checkpoint);
      const auto queries = load_dataset(read_manifest(manifest));
      const FeatureSet q = extract_features(config.model, params, queries);
      double recall = 0.0;
      if (gallery_manifest.empty()) {
        recall = retrieval_eval(q, q, config.eval.retrieval_k, true);
      } else {
        const auto gallery = load_dataset(read_manifest(gallery_manifest));
        recall = retrieval_eval(q, extract_features(config.model, params, gallery), config.eval.retrieval_k);
      }
      auto csv = open_out(out_path);
      csv << "metric,value\nretrieval_recall_at_" << config.eval.retrieval_k << ',' << fmt(recall) << '\n';
      out << "recall@" << config.eval.retrieval_k << ' ' << recall << '\n';
    } else if (*viz_matrix) {
      const ModelParams params = model_from(config, checkpoint);
      const RowMatrixXd m = viz_consistency_matrix(config.model, params, model_input(config, clip_path), out_path);
      out << "wrote " << m.rows() << " x " << m.cols() << " matrix to " << out_path << '\n';
    } else if (*viz_heat) {
      const ModelParams params = model_from(config, checkpoint);
      const ByteImage img = viz_heatmap(config.model, params, model_input(config, clip_path), out_path);
      out << "wrote " << img.cols() << " x " << img.rows() << " heatmap to " << out_path << '\n';
    } else if (*gradcheck) {
      const GradCheckReport r = siamese_gradcheck(config.model, config.train, config.train.seed, eps);
      out << "max relative error " << fmt(r.max_relative_error) << " (coordinate " << r.worst_coordinate
          << ", analytic " << fmt(r.analytic) << ", numeric " << fmt(r.numeric) << ")\n";
      if (!(r.max_relative_error < 1e-4)) {
        err << "gradient check failed: " << r.max_relative_error << " >= 1e-4\n";
        return 2;
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace stcr
