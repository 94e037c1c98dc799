// hals: synthetic data generation, beam statistics, training, inference and
// evaluation for polar range-image super-resolution.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hals/baseline.hpp"
#include "hals/beam_stats.hpp"
#include "hals/checkpoint.hpp"
#include "hals/fs_util.hpp"
#include "hals/kv_config.hpp"
#include "hals/metrics.hpp"
#include "hals/projection.hpp"
#include "hals/scene.hpp"
#include "hals/threading.hpp"
#include "hals/trainer.hpp"
#include "hals/velodyne_io.hpp"
#include "hals/verify.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string basename_of(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

struct GenDataArgs {
  int scenes = 10;
  uint64_t seed = 0;
  double difficulty = 0.5;
  std::string sensor_path;
  std::string out_dir;
};

int cmd_gen_data(const GenDataArgs& args) {
  const auto start = Clock::now();
  hals::SensorModel sensor = args.sensor_path.empty()
                                 ? hals::default_synthetic_sensor()
                                 : hals::load_sensor(args.sensor_path);
  sensor.validate();
  hals::ensure_dir(args.out_dir);

  for (int i = 0; i < args.scenes; ++i) {
    hals::ScanJob job;
    job.scene = hals::random_scene(hals::mix_seed(args.seed, i), args.difficulty);
    job.sensor = sensor;
    job.sensor_origin = {0, 0, 1.73};
    const hals::RangeImage scan = hals::raycast_scan(job);
    char name[64];
    std::snprintf(name, sizeof(name), "scan_%05d.hals", i);
    hals::save_range_image(args.out_dir + "/" + name, scan);
  }
  hals::save_sensor(args.out_dir + "/sensor.txt", sensor);
  hals::write_manifest(args.out_dir + "/manifest.txt", "gen-data",
                       {{"scenes", std::to_string(args.scenes)},
                        {"seed", std::to_string(args.seed)},
                        {"difficulty", std::to_string(args.difficulty)},
                        {"sensor", args.sensor_path.empty() ? "default" : args.sensor_path},
                        {"out", args.out_dir},
                        {"threads", std::to_string(hals::max_threads())}},
                       seconds_since(start));
  std::cout << "wrote " << args.scenes << " scans to " << args.out_dir << "\n";
  return 0;
}

struct StatsArgs {
  std::string data_dir;
  std::string out_csv;
  std::string sensor_path;
};

int cmd_stats(const StatsArgs& args) {
  const auto start = Clock::now();
  const auto files = hals::list_files(args.data_dir, ".hals");
  HALS_CHECK(!files.empty(), "stats: no .hals files in " + args.data_dir);
  std::vector<hals::RangeImage> dataset;
  dataset.reserve(files.size());
  for (const auto& f : files) dataset.push_back(hals::load_range_image(f));

  hals::SensorModel sensor;
  if (!args.sensor_path.empty()) {
    sensor = hals::load_sensor(args.sensor_path);
  } else {
    sensor = hals::default_synthetic_sensor();
    sensor.height = dataset[0].height;
    sensor.width = dataset[0].width;
  }
  const hals::BeamStats stats = hals::per_beam_stats(dataset, sensor);
  hals::write_beam_stats_csv(args.out_csv, stats);
  const double empty_fraction = hals::empty_bin_fraction(dataset);

  hals::write_manifest(args.out_csv + ".manifest.txt", "stats",
                       {{"data", args.data_dir},
                        {"out", args.out_csv},
                        {"frames", std::to_string(stats.frame_count)},
                        {"empty_bin_fraction", std::to_string(empty_fraction)}},
                       seconds_since(start));
  std::cout << "frames " << stats.frame_count << ", empty-bin fraction "
            << empty_fraction << "\n";
  return 0;
}

struct TrainArgs {
  std::string config_path;
  std::string out_dir;
  std::string resume_dir;
  bool print_config = false;
};

int cmd_train(const TrainArgs& args) {
  const auto start = Clock::now();
  if (args.print_config) {
    std::cout << hals::train_config_to_string(hals::TrainConfig{});
    return 0;
  }
  HALS_CHECK(!args.config_path.empty(), "train: --config is required");
  hals::TrainConfig config = hals::load_train_config(args.config_path);
  if (!args.out_dir.empty()) config.out_dir = args.out_dir;
  HALS_CHECK(!config.out_dir.empty(), "train: output directory not set");
  config.validate();

  const hals::TrainResult result = hals::train(config, args.resume_dir);
  hals::write_manifest(config.out_dir + "/manifest.txt", "train",
                       {{"config", args.config_path},
                        {"seed", std::to_string(config.seed)},
                        {"steps", std::to_string(result.steps)},
                        {"final_l1", std::to_string(result.final_l1)},
                        {"final_vnl", std::to_string(result.final_vnl)},
                        {"checkpoint", result.checkpoint_dir},
                        {"loss_curve", result.loss_curve_path}},
                       seconds_since(start));
  std::cout << "trained " << result.steps << " steps, final l1 " << result.final_l1
            << ", final vnl " << result.final_vnl << "\n";
  return 0;
}

struct UpsampleArgs {
  std::string ckpt_dir;
  std::string input_path;
  std::string out_path;
  int rate = 0;
  double threshold = 0.3;
};

int cmd_upsample(const UpsampleArgs& args) {
  const auto start = Clock::now();
  hals::GeneratorConfig gen;
  hals::NormConfig norm;
  hals::load_generator_config(args.ckpt_dir + "/gen_config.txt", &gen, &norm);
  if (args.rate != 0 && args.rate != gen.upsample_rate)
    hals::fail("upsample: requested rate " + std::to_string(args.rate) +
               " does not match checkpoint rate " + std::to_string(gen.upsample_rate));

  hals::ParamStore params;
  hals::load_parameters(args.ckpt_dir + "/params.bin", &params);

  const hals::RangeImage lr = hals::load_range_image(args.input_path);
  HALS_CHECK(lr.mode == hals::ChannelMode::Polar, "upsample: input must be polar");
  const hals::Tensor4 input = hals::normalize_polar(lr, norm);
  const hals::GeneratorOutput out = hals::run_generator(gen, params, input);
  const hals::RangeImage hr =
      hals::denormalize_polar(out.q_fused, 0, norm, args.threshold);

  // Output pair: range-image container + unprojected cloud.
  std::string bin_path = args.out_path;
  std::string hals_path = args.out_path;
  if (bin_path.size() > 4 && bin_path.substr(bin_path.size() - 4) == ".bin")
    hals_path = bin_path.substr(0, bin_path.size() - 4) + ".hals";
  else
    bin_path += ".bin";
  hals::save_range_image(hals_path, hr);

  hals::SensorModel out_sensor = hals::default_synthetic_sensor();
  out_sensor.height = hr.height;
  out_sensor.width = hr.width;
  const hals::PointCloud cloud = hals::unproject(hr, out_sensor, args.threshold);
  hals::write_velodyne_bin(bin_path, cloud);

  hals::write_manifest(bin_path + ".manifest.txt", "upsample",
                       {{"checkpoint", args.ckpt_dir},
                        {"input", args.input_path},
                        {"rate", std::to_string(gen.upsample_rate)},
                        {"container", hals_path},
                        {"cloud", bin_path},
                        {"points", std::to_string(cloud.size())}},
                       seconds_since(start));
  std::cout << "upsampled " << lr.height << "x" << lr.width << " -> " << hr.height
            << "x" << hr.width << ", " << cloud.size() << " points\n";
  return 0;
}

struct EvalArgs {
  std::string pred_dir;
  std::string gt_dir;
  std::string out_csv;
  std::string sensor_path;
  double threshold = 0.3;
  uint64_t seed = 0;
};

int cmd_eval(const EvalArgs& args) {
  const auto start = Clock::now();
  const auto pred_files = hals::list_files(args.pred_dir, ".hals");
  HALS_CHECK(!pred_files.empty(), "eval: no .hals files in " + args.pred_dir);

  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& p : pred_files) {
    const std::string gt = args.gt_dir + "/" + basename_of(p);
    HALS_CHECK(std::filesystem::exists(gt), "eval: missing ground truth " + gt);
    pairs.emplace_back(p, gt);
  }

  const int n = int(pairs.size());
  std::vector<hals::MetricReport> reports(n);
  std::vector<hals::SensorModel> sensors(n);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    const hals::RangeImage pred = hals::load_range_image(pairs[i].first);
    const hals::RangeImage gt = hals::load_range_image(pairs[i].second);
    hals::SensorModel sensor;
    if (!args.sensor_path.empty()) {
      sensor = hals::load_sensor(args.sensor_path);
    } else {
      sensor = hals::default_synthetic_sensor();
      sensor.height = gt.height;
      sensor.width = gt.width;
    }
    sensors[i] = sensor;
    reports[i] = hals::evaluate_pair(pred, gt, sensor, args.threshold,
                                     hals::mix_seed(args.seed, i));
  }

  std::ofstream os(args.out_csv);
  HALS_CHECK(os.good(), "eval: cannot write " + args.out_csv);
  os << "# emd_convention = mean_matched_distance_m (emd_sum also reported)\n";
  os << "# chamfer_convention = sum_of_mean_squared_nearest_m2\n";
  os << "# voxel_grid = 0.1 m cells anchored at gt bounding-box minimum\n";
  os << "frame,file,n_pred,n_gt,emd,emd_sum,emd_approx,cd,mae,rmse,iou,"
        "precision,recall,f1,voxels_pred,voxels_gt,voxels_intersection\n";
  os.precision(10);
  hals::MetricReport mean;
  for (int i = 0; i < n; ++i) {
    const auto& r = reports[i];
    os << i << ',' << basename_of(pairs[i].first) << ',' << r.n_pred << ','
       << r.n_gt << ',' << r.emd << ',' << r.emd_sum << ',' << (r.emd_approx ? 1 : 0)
       << ',' << r.cd << ',' << r.mae << ',' << r.rmse << ',' << r.iou << ','
       << r.precision << ',' << r.recall << ',' << r.f1 << ',' << r.voxels_pred
       << ',' << r.voxels_gt << ',' << r.voxels_intersection << "\n";
    mean.emd += r.emd;
    mean.cd += r.cd;
    mean.mae += r.mae;
    mean.rmse += r.rmse;
    mean.iou += r.iou;
    mean.precision += r.precision;
    mean.recall += r.recall;
    mean.f1 += r.f1;
  }
  os << "mean,over_" << n << "_frames,,," << mean.emd / n << ",,," << mean.cd / n
     << ',' << mean.mae / n << ',' << mean.rmse / n << ',' << mean.iou / n << ','
     << mean.precision / n << ',' << mean.recall / n << ',' << mean.f1 / n
     << ",,,\n";
  HALS_CHECK(os.good(), "eval: write failed");

  hals::write_manifest(args.out_csv + ".manifest.txt", "eval",
                       {{"pred", args.pred_dir},
                        {"gt", args.gt_dir},
                        {"frames", std::to_string(n)},
                        {"seed", std::to_string(args.seed)},
                        {"mean_emd", std::to_string(mean.emd / n)},
                        {"mean_iou", std::to_string(mean.iou / n)}},
                       seconds_since(start));
  std::cout << "evaluated " << n << " frames, mean EMD " << mean.emd / n
            << ", mean IoU " << mean.iou / n << "\n";
  return 0;
}

int cmd_gradcheck(const std::string& level) {
  constexpr double kGate = 1e-4;
  hals::GradCheckSummary summary;
  if (level == "ops") {
    summary = hals::gradcheck_ops();
  } else if (level == "generator") {
    summary = hals::gradcheck_generator();
  } else if (level == "loss") {
    summary = hals::gradcheck_loss();
  } else {
    hals::fail("gradcheck: unknown level " + level);
  }
  std::cout << "gradcheck " << level << ": " << summary.checks << " checks, "
            << summary.elements_checked << " elements, max relative error "
            << summary.max_err << " (" << summary.elements_skipped
            << " kink crossings skipped)\n";
  if (summary.max_err >= kGate) {
    std::cerr << "gradcheck FAILED (gate " << kGate << ")\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  hals::apply_thread_limit();
  CLI::App app{"hals: height-aware lidar super-resolution toolkit"};
  app.require_subcommand(1);

  GenDataArgs gen_args;
  auto* gen = app.add_subcommand("gen-data", "generate synthetic scans");
  gen->add_option("--scenes", gen_args.scenes, "number of scans");
  gen->add_option("--seed", gen_args.seed, "base seed");
  gen->add_option("--difficulty", gen_args.difficulty, "scene difficulty in [0,1]");
  gen->add_option("--sensor", gen_args.sensor_path, "sensor config file");
  gen->add_option("--out", gen_args.out_dir, "output directory")->required();

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "per-beam dataset statistics");
  stats->add_option("--data", stats_args.data_dir, "directory of .hals files")->required();
  stats->add_option("--out", stats_args.out_csv, "output CSV")->required();
  stats->add_option("--sensor", stats_args.sensor_path, "sensor config file");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train the generator");
  train->add_option("--config", train_args.config_path, "train config file");
  train->add_option("--out", train_args.out_dir, "output directory override");
  train->add_option("--resume", train_args.resume_dir, "checkpoint directory to resume");
  train->add_flag("--print-config", train_args.print_config, "print default config");

  UpsampleArgs up_args;
  auto* up = app.add_subcommand("upsample", "upsample one scan with a checkpoint");
  up->add_option("--ckpt", up_args.ckpt_dir, "checkpoint directory")->required();
  up->add_option("--in", up_args.input_path, "input .hals scan")->required();
  up->add_option("--rate", up_args.rate, "expected upsample rate (checked)");
  up->add_option("--out", up_args.out_path, "output cloud path (.bin)")->required();
  up->add_option("--threshold", up_args.threshold, "drop threshold, meters");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "evaluate predictions against ground truth");
  eval->add_option("--pred", eval_args.pred_dir, "prediction directory")->required();
  eval->add_option("--gt", eval_args.gt_dir, "ground-truth directory")->required();
  eval->add_option("--out", eval_args.out_csv, "output CSV")->required();
  eval->add_option("--sensor", eval_args.sensor_path, "sensor config file");
  eval->add_option("--threshold", eval_args.threshold, "drop threshold, meters");
  eval->add_option("--seed", eval_args.seed, "subsampling seed");

  std::string gradcheck_level = "ops";
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  gc->add_option("--level", gradcheck_level, "ops | generator | loss");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_args);
    if (stats->parsed()) return cmd_stats(stats_args);
    if (train->parsed()) return cmd_train(train_args);
    if (up->parsed()) return cmd_upsample(up_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (gc->parsed()) return cmd_gradcheck(gradcheck_level);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
