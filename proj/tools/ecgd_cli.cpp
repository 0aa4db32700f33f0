#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "ecgd/image_io.hpp"
#include "ecgd/pipeline.hpp"
#include "ecgd/serialize.hpp"
#include "ecgd/synth.hpp"

namespace fs = std::filesystem;

namespace {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

class Log {
 public:
  Log() {
    const char* env = std::getenv("ECGD_LOG");
    const std::string v = env ? env : "";
    if (v == "debug" || v == "trace") level_ = Level::debug;
    else if (v == "info") level_ = Level::info;
    else if (v == "error") level_ = Level::error;
    else if (v == "off" || v == "quiet") level_ = Level::off;
  }

  void operator()(Level lvl, const std::string& msg) {
    if (lvl < level_) return;
    static const char* kTag[] = {"debug", "info", "warn", "error"};
    std::lock_guard<std::mutex> lock(mu_);
    std::cerr << "ecgd [" << kTag[static_cast<int>(lvl)] << "] " << msg << '\n';
  }

 private:
  Level level_ = Level::warn;
  std::mutex mu_;
};

Log& logger() {
  static Log log;
  return log;
}

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct DigitizeArgs {
  std::vector<std::string> inputs;
  std::string out_dir;
  ecgd::PipelineConfig cfg;
  std::optional<double> px_per_mm;
  bool debug_images = false;
  std::string format = "csv";
};

std::string two_digits(std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", n);
  return buf;
}

// One output directory per input, named after the file stem; repeated stems
// get a numeric suffix in input order.
std::vector<fs::path> output_dirs(const std::vector<std::string>& inputs, const fs::path& root) {
  std::map<std::string, int> seen;
  std::vector<fs::path> dirs;
  for (const auto& in : inputs) {
    std::string stem = fs::path(in).stem().string();
    if (stem.empty()) stem = "input";
    const int n = ++seen[stem];
    dirs.push_back(root / (n == 1 ? stem : stem + "_" + std::to_string(n)));
  }
  return dirs;
}

void process_input(const std::string& input, const fs::path& dir, const DigitizeArgs& args) {
  auto& log = logger();
  log(Level::info, "digitizing " + input);
  const ecgd::RgbImage img = ecgd::load_image(input);
  fs::create_directories(dir);

  ecgd::DebugSink sink;
  std::size_t serial = 0;
  if (args.debug_images) {
    fs::create_directories(dir / "debug");
    sink = [&](const std::string& name, ecgd::DebugRaster raster) {
      const fs::path file = dir / "debug" / (two_digits(serial++) + "_" + name + ".png");
      std::visit([&](const auto* image) { ecgd::save_image(*image, file.string()); }, raster);
      log(Level::debug, "wrote " + file.string());
    };
  }

  const ecgd::DigitizeResult res = ecgd::digitize(img, args.cfg, sink);
  std::vector<std::string> files;
  for (const auto& lead : res.leads) {
    const std::string file = lead.name + (args.format == "json" ? ".json" : ".csv");
    const std::string body =
        args.format == "json" ? ecgd::signal_json(lead).dump(2) + "\n" : ecgd::signal_csv(lead.signal);
    ecgd::write_file_atomic(dir / file, body);
    files.push_back(file);
  }
  ecgd::write_file_atomic(dir / "manifest.json", ecgd::manifest_json(res, input, args.format, files).dump(2) + "\n");
  for (const auto& w : res.warnings) log(Level::warn, input + ": " + w);
  log(Level::info, input + ": " + std::to_string(res.leads.size()) + " leads at " +
                       ecgd::format_fixed(res.px_per_mm, 3) + " px/mm (" + res.px_per_mm_source + ")");
}

int run_digitize(const DigitizeArgs& args) {
  const auto dirs = output_dirs(args.inputs, args.out_dir);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failed{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < args.inputs.size(); i = next++) {
      try {
        process_input(args.inputs[i], dirs[i], args);
      } catch (const std::exception& e) {
        ++failed;
        logger()(Level::error, args.inputs[i] + ": " + e.what());
      }
    }
  };
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers = std::min(hw, args.inputs.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n_workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failed > 0) {
    logger()(Level::error, std::to_string(failed.load()) + " of " + std::to_string(args.inputs.size()) +
                               " inputs failed");
    return kExitFailed;
  }
  return kExitOk;
}

struct SynthArgs {
  std::string spec;
  std::string out_dir;
  double blur = 0.0;
  double desaturate = 0.0;
  double rotate = 0.0;
};

int run_synth(const SynthArgs& args) {
  try {
    const ecgd::SheetSpec spec = ecgd::load_sheet_spec(args.spec);
    ecgd::Sheet sheet = ecgd::render_sheet(spec);
    ecgd::RgbImage img = std::move(sheet.image);
    if (args.rotate != 0.0) img = ecgd::rotate(img, args.rotate, spec.paper_color);
    if (args.blur != 0.0) img = ecgd::blur(img, args.blur);
    if (args.desaturate != 0.0) img = ecgd::desaturate(img, args.desaturate);

    fs::create_directories(args.out_dir);
    const std::string stem = fs::path(args.spec).stem().string();
    const fs::path png = fs::path(args.out_dir) / (stem + ".png");
    const fs::path truth = fs::path(args.out_dir) / (stem + ".truth.json");
    ecgd::save_image(img, png.string());
    ecgd::Json gt = ecgd::ground_truth_json(sheet.truth, img.width(), img.height());
    gt["distortions"] = {{"rotate_deg", args.rotate}, {"blur_sigma_px", args.blur}, {"desaturate", args.desaturate}};
    ecgd::write_file_atomic(truth, gt.dump(2) + "\n");
    logger()(Level::info, "wrote " + png.string() + " and " + truth.string());
    return kExitOk;
  } catch (const std::exception& e) {
    logger()(Level::error, args.spec + ": " + e.what());
    return kExitFailed;
  }
}

int run_feature_stats(const std::string& input, std::size_t stripe, const ecgd::PipelineConfig& cfg) {
  try {
    const auto blobs = ecgd::stripe_blobs(ecgd::load_image(input), cfg, stripe);
    std::cout << ecgd::blob_table_csv(blobs);
    return kExitOk;
  } catch (const std::exception& e) {
    logger()(Level::error, input + ": " + e.what());
    return kExitFailed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Digitize scanned ECG paper records into numeric signals"};
  app.require_subcommand(1);

  DigitizeArgs dig;
  auto* digitize = app.add_subcommand("digitize", "Extract lead signals from scanned sheets");
  digitize->add_option("inputs", dig.inputs, "Scanned sheets (PNG, PPM or PGM)")->required();
  digitize->add_option("--out", dig.out_dir, "Output directory")->required();
  digitize->add_option("--mv-per-mm", dig.cfg.mv_per_mm, "Vertical scale")->check(CLI::PositiveNumber);
  digitize->add_option("--ms-per-mm", dig.cfg.ms_per_mm, "Horizontal scale")->check(CLI::PositiveNumber);
  digitize->add_option("--px-per-mm", dig.px_per_mm, "Skip grid pitch estimation")->check(CLI::PositiveNumber);
  digitize->add_option("--otsu-scale", dig.cfg.otsu_scale, "Grid mask level relative to Otsu")
      ->check(CLI::PositiveNumber);
  digitize->add_flag("--debug-images", dig.debug_images, "Dump every intermediate raster");
  digitize->add_option("--format", dig.format, "Signal file format")->check(CLI::IsMember({"csv", "json"}));

  SynthArgs syn;
  auto* synth = app.add_subcommand("synth", "Render a synthetic sheet with ground truth");
  synth->add_option("--spec", syn.spec, "Sheet spec (JSON)")->required();
  synth->add_option("--blur", syn.blur, "Gaussian blur sigma in pixels")->check(CLI::NonNegativeNumber);
  synth->add_option("--desaturate", syn.desaturate, "Desaturation factor")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--rotate", syn.rotate, "Rotation in degrees");
  synth->add_option("--out", syn.out_dir, "Output directory")->required();

  std::string fs_input;
  std::size_t fs_stripe = 0;
  auto* stats = app.add_subcommand("feature-stats", "Print the blob table of one stripe as CSV");
  stats->add_option("input", fs_input, "Scanned sheet")->required();
  stats->add_option("--stripe", fs_stripe, "Stripe index, top to bottom from 0")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (digitize->parsed()) {
    dig.cfg.px_per_mm_override = dig.px_per_mm;
    try {
      dig.cfg.validate();
    } catch (const std::exception& e) {
      logger()(Level::error, e.what());
      return kExitUsage;
    }
    return run_digitize(dig);
  }
  if (synth->parsed()) return run_synth(syn);
  return run_feature_stats(fs_input, fs_stripe, ecgd::PipelineConfig{});
}
