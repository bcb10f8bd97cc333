#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gestalt/config.hpp"
#include "gestalt/eval.hpp"
#include "gestalt/image_io.hpp"
#include "gestalt/io.hpp"
#include "gestalt/ocr_http.hpp"
#include "gestalt/overlay.hpp"
#include "gestalt/pipeline.hpp"
#include "gestalt/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gestalt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

constexpr const char* kHierarchySuffix = ".hierarchy.json";

std::string dump(const json& j) { return j.dump(2) + "\n"; }

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_image(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// Directories expand to their images in name order; files are kept as given.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    const fs::path p(a);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && is_image(e.path()) && !has_suffix(e.path().filename().string(), ".overlay.png")) {
          found.push_back(e.path());
        }
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

// A file argument, or <dir>/<stem><suffix> when it names a directory.
fs::path per_image_file(const std::string& arg, const fs::path& image, const std::string& suffix) {
  if (arg.empty()) return image.parent_path() / (image.stem().string() + suffix);
  if (fs::is_directory(arg)) return fs::path(arg) / (image.stem().string() + suffix);
  return arg;
}

json read_json_file(const fs::path& p) {
  const auto text = read_text_file(p);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(p.string() + ": " + e.what());
  }
}

// Runs `work(i)` for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& work) {
  const auto threads = static_cast<std::size_t>(std::max(1, std::min<int>(jobs, static_cast<int>(n))));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) work(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct InputResult {
  bool ok = false;
  std::string error;
  std::vector<std::string> outputs;
};

InputResult run_one(const fs::path& image_path, const RunConfig& cfg, const std::string& metadata) {
  InputResult r;
  try {
    if (!fs::exists(image_path)) throw std::runtime_error("no such file: " + image_path.string());
    const RgbImage image = load_image(image_path);
    const auto& pc = cfg.pipeline;
    GroupingResult grouped;
    if (!metadata.empty()) {
      const auto widgets_path = per_image_file(metadata, image_path, ".widgets.json");
      auto widgets = widgets_from_json(read_json_file(widgets_path));
      for (const auto& w : widgets) {
        if (!contains(image.bounds(), w.bbox)) {
          throw BoundsError(widgets_path.string() + ": widget " + std::to_string(w.id) + " lies outside the image");
        }
      }
      infer_containers(widgets, pc.detector.scaled_px(pc.detector.container_tolerance, image.width()));
      grouped = group_widgets(std::move(widgets), image.width(), pc, nullptr);
    } else {
      std::vector<TextBox> ocr;
      if (cfg.ocr.mode == "http") {
        HttpOcrConfig http{cfg.ocr.url, cfg.ocr.timeout_seconds, cfg.ocr.retries, {}};
        http.apply_environment();
        ocr = HttpOcrProvider(http).recognize(image_path);
      } else {
        ocr = FileOcrProvider(per_image_file(cfg.ocr.path, image_path, ".ocr.json")).recognize(image_path);
      }
      grouped = group_widgets(detect_widgets(image, ocr, pc), image.width(), pc, &image);
    }
    const fs::path out_dir(cfg.out);
    const auto stem = image_path.stem().string();
    const auto hierarchy_path = out_dir / (stem + kHierarchySuffix);
    write_atomic(hierarchy_path, dump(to_json(grouped.hierarchy)));
    r.outputs.push_back(hierarchy_path.string());
    if (cfg.overlay) {
      const auto overlay_path = out_dir / (stem + ".overlay.png");
      write_atomic(overlay_path, encode_png(render_overlay(image, grouped.hierarchy)));
      r.outputs.push_back(overlay_path.string());
    }
    r.ok = true;
  } catch (const std::exception& e) {
    r.error = e.what();
    if (r.error.find(image_path.string()) == std::string::npos) r.error = image_path.string() + ": " + r.error;
  }
  return r;
}

int cmd_run(const std::vector<std::string>& args, const RunConfig& cfg, const std::string& metadata) {
  const auto inputs = expand_inputs(args);
  if (inputs.empty()) {
    std::cerr << "error: no input images\n";
    return kExitPartial;
  }
  fs::create_directories(cfg.out);
  std::vector<InputResult> results(inputs.size());
  parallel_for(inputs.size(), cfg.jobs, [&](std::size_t i) { results[i] = run_one(inputs[i], cfg, metadata); });

  json report = json::array();
  std::size_t failed = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto& r = results[i];
    json rec{{"input", inputs[i].string()}, {"status", r.ok ? "ok" : "error"}};
    if (r.ok) {
      rec["outputs"] = r.outputs;
      std::cout << inputs[i].string() << ": ok\n";
    } else {
      rec["error"] = r.error;
      std::cerr << "error: " << r.error << "\n";
      ++failed;
    }
    report.push_back(std::move(rec));
  }
  write_atomic(fs::path(cfg.out) / "run_report.json", dump(report));
  return failed ? kExitPartial : kExitOk;
}

std::map<std::string, fs::path> hierarchy_files(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (e.is_regular_file() && has_suffix(name, kHierarchySuffix)) {
      out.emplace(name.substr(0, name.size() - std::string(kHierarchySuffix).size()), e.path());
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const RunConfig& cfg) {
  if (!fs::is_directory(gt_dir)) {
    std::cerr << "error: ground-truth directory not found: " << gt_dir << "\n";
    return kExitPartial;
  }
  if (!fs::is_directory(pred_dir)) {
    std::cerr << "error: prediction directory not found: " << pred_dir << "\n";
    return kExitPartial;
  }
  const auto gt = hierarchy_files(gt_dir);
  const auto pred = hierarchy_files(pred_dir);
  if (gt.empty()) {
    std::cerr << "error: no *" << kHierarchySuffix << " files in " << gt_dir << "\n";
    return kExitPartial;
  }
  std::vector<std::string> skipped;
  for (const auto& [stem, path] : pred) {
    if (!gt.count(stem)) skipped.push_back(stem + " (no ground truth)");
  }

  struct Totals {
    std::size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<int, Totals> totals;
  json per_gui = json::array();
  std::string csv = "gui,threshold,tp,fp,fn,precision,recall,f1\n";
  std::size_t evaluated = 0;
  for (const auto& [stem, gt_path] : gt) {
    const auto it = pred.find(stem);
    if (it == pred.end()) {
      skipped.push_back(stem + " (no prediction)");
      continue;
    }
    std::vector<TokenSeq> gt_blocks, pred_blocks;
    try {
      gt_blocks = block_sequences(hierarchy_from_json(read_json_file(gt_path)));
      pred_blocks = block_sequences(hierarchy_from_json(read_json_file(it->second)));
    } catch (const std::exception& e) {
      skipped.push_back(stem + " (unreadable: " + e.what() + ")");
      continue;
    }
    ++evaluated;
    for (int t : cfg.thresholds) {
      const auto m = match_blocks(gt_blocks, pred_blocks, static_cast<std::size_t>(t));
      auto& tot = totals[t];
      tot.tp += m.tp;
      tot.fp += m.fp;
      tot.fn += m.fn;
      per_gui.push_back({{"gui", stem}, {"threshold", t}, {"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn},
                         {"precision", m.scores.precision}, {"recall", m.scores.recall}, {"f1", m.scores.f1}});
      csv += stem + "," + std::to_string(t) + "," + std::to_string(m.tp) + "," + std::to_string(m.fp) + "," +
             std::to_string(m.fn) + "," + fmt(m.scores.precision) + "," + fmt(m.scores.recall) + "," +
             fmt(m.scores.f1) + "\n";
    }
  }
  for (const auto& s : skipped) std::cerr << "skipped: " << s << "\n";
  if (evaluated == 0) {
    std::cerr << "error: no GUI could be evaluated\n";
    return kExitPartial;
  }

  json aggregate = json::array();
  std::cout << "threshold  tp  fp  fn  precision  recall  f1\n";
  for (int t : cfg.thresholds) {
    const auto& tot = totals[t];
    const auto s = metrics(tot.tp, tot.fp, tot.fn);
    aggregate.push_back({{"threshold", t}, {"tp", tot.tp}, {"fp", tot.fp}, {"fn", tot.fn},
                         {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}});
    csv += "ALL," + std::to_string(t) + "," + std::to_string(tot.tp) + "," + std::to_string(tot.fp) + "," +
           std::to_string(tot.fn) + "," + fmt(s.precision) + "," + fmt(s.recall) + "," + fmt(s.f1) + "\n";
    std::cout << t << "  " << tot.tp << "  " << tot.fp << "  " << tot.fn << "  " << fmt(s.precision) << "  "
              << fmt(s.recall) << "  " << fmt(s.f1) << "\n";
  }
  json report{{"evaluated", evaluated}, {"skipped", skipped}, {"aggregate", aggregate}, {"per_gui", per_gui}};
  fs::create_directories(cfg.out);
  write_atomic(fs::path(cfg.out) / "eval_report.json", dump(report));
  write_atomic(fs::path(cfg.out) / "eval_report.csv", csv);
  return skipped.empty() ? kExitOk : kExitPartial;
}

struct SynthArgs {
  std::vector<std::string> kinds{"list", "grid", "cards", "tabs", "mixed"};
  int count = 1;
  std::uint64_t seed = 1;
  int items = 0;
  int columns = 0;
  int width = 1440;
  int height = 2560;
  bool occlusion = false;
  bool plant_errors = false;
};

int cmd_synth(const SynthArgs& a, const RunConfig& cfg) {
  if (a.count < 1) throw ConfigError("--count must be >= 1");
  std::vector<SynthSpec> specs;
  for (const auto& k : a.kinds) {
    for (int i = 0; i < a.count; ++i) {
      SynthSpec s;
      try {
        s.kind = layout_kind_from_string(k);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      s.seed = a.seed + static_cast<std::uint64_t>(i);
      s.items = a.items;
      s.columns = a.columns;
      s.width = a.width;
      s.height = a.height;
      s.occlusion = a.occlusion;
      s.plant_errors = a.plant_errors;
      try {
        s.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      specs.push_back(s);
    }
  }
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (!fs::is_directory(cfg.out)) {
    std::cerr << "error: cannot create output directory " << cfg.out << "\n";
    return kExitPartial;
  }
  std::vector<std::string> errors(specs.size());
  parallel_for(specs.size(), cfg.jobs, [&](std::size_t i) {
    const auto& s = specs[i];
    char stem[64];
    std::snprintf(stem, sizeof stem, "%s-%04llu", to_string(s.kind), static_cast<unsigned long long>(s.seed));
    try {
      const auto gui = synthesize(s);
      const fs::path base = fs::path(cfg.out) / stem;
      write_atomic(fs::path(base.string() + ".png"), encode_png(gui.image));
      write_atomic(fs::path(base.string() + ".ocr.json"), dump(ocr_records_to_json(gui.ocr)));
      write_atomic(fs::path(base.string() + ".widgets.json"), dump(widgets_to_json(gui.widgets)));
      write_atomic(fs::path(base.string() + kHierarchySuffix), dump(to_json(gui.truth)));
    } catch (const std::exception& e) {
      errors[i] = std::string(stem) + ": " + e.what();
    }
  });
  std::size_t failed = 0;
  for (const auto& e : errors) {
    if (e.empty()) continue;
    std::cerr << "error: " << e << "\n";
    ++failed;
  }
  std::cout << "wrote " << specs.size() - failed << " synthetic GUIs to " << cfg.out << "\n";
  return failed ? kExitPartial : kExitOk;
}

int cmd_render(const std::string& image_path, const std::string& hierarchy_path, const RunConfig& cfg) {
  try {
    const auto image = load_image(image_path);
    const auto h = hierarchy_from_json(read_json_file(hierarchy_path));
    fs::create_directories(cfg.out);
    const auto out = fs::path(cfg.out) / (fs::path(image_path).stem().string() + ".overlay.png");
    write_atomic(out, encode_png(render_overlay(image, h)));
    std::cout << "wrote " << out.string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
}

std::vector<int> parse_thresholds(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    try {
      if (dash != std::string::npos && dash > 0) {
        const int lo = std::stoi(item.substr(0, dash)), hi = std::stoi(item.substr(dash + 1));
        for (int t = lo; t <= hi; ++t) out.push_back(t);
      } else {
        out.push_back(std::stoi(item));
      }
    } catch (const std::exception&) {
      throw ConfigError("bad --thresholds value '" + s + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pixel-only GUI widget detection, perceptual grouping and hierarchy evaluation"};
  app.name("gestalt");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, metadata, ocr_file, ocr_url, thresholds;
  int jobs = 0;
  bool overlay = false;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--jobs", jobs, "Images processed in parallel");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--overlay", overlay, "Also write <stem>.overlay.png");
  app.add_option("--metadata-widgets", metadata, "Widget file (or directory of <stem>.widgets.json) to group instead of detecting");
  app.add_option("--ocr-file", ocr_file, "OCR fixture file (or directory of <stem>.ocr.json)");
  app.add_option("--ocr-url", ocr_url, "HTTP OCR endpoint");
  app.add_option("--thresholds", thresholds, "Edit-distance thresholds, e.g. 0,1,2 or 0-4");

  // Every config key can be overridden by a flag of the same dotted name.
  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option*> override_opts;
  for (const auto& key : config_keys()) {
    if (key.find('.') == std::string::npos) continue;  // top-level keys have dedicated flags
    override_opts[key] = app.add_option("--" + key, overrides[key], "Config override")->group("Config overrides");
  }

  std::vector<std::string> run_inputs;
  auto* run = app.add_subcommand("run", "Detect and group widgets in screenshots");
  run->add_option("images", run_inputs, "Image files or directories")->required();

  std::string pred_dir, gt_dir;
  auto* eval = app.add_subcommand("eval", "Score predicted hierarchies against ground truth");
  eval->add_option("pred", pred_dir, "Directory of predicted <stem>.hierarchy.json")->required();
  eval->add_option("gt", gt_dir, "Directory of ground-truth <stem>.hierarchy.json")->required();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate synthetic GUIs with ground truth");
  synth->add_option("--kind", synth_args.kinds, "Layout kinds: list, grid, cards, tabs, mixed");
  synth->add_option("--count", synth_args.count, "GUIs per kind");
  synth->add_option("--seed", synth_args.seed, "First seed");
  synth->add_option("--items", synth_args.items, "Item count (0 = from the seed)");
  synth->add_option("--columns", synth_args.columns, "Grid columns (0 = from the seed)");
  synth->add_option("--width", synth_args.width, "Canvas width");
  synth->add_option("--height", synth_args.height, "Canvas height");
  synth->add_flag("--occlusion", synth_args.occlusion, "Leave the last list icon out of the pixels");
  synth->add_flag("--plant-errors", synth_args.plant_errors, "Cards: plant a tiny icon and a class-flipped OCR entry");

  std::string render_image, render_hierarchy;
  auto* render = app.add_subcommand("render", "Draw a hierarchy over its screenshot");
  render->add_option("image", render_image, "Screenshot")->required();
  render->add_option("hierarchy", render_hierarchy, "Hierarchy JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  RunConfig cfg;
  try {
    json doc = json::object();
    if (!config_path.empty()) {
      try {
        doc = json::parse(read_text_file(config_path));
      } catch (const json::exception& e) {
        throw ConfigError(config_path + ": " + e.what());
      }
      if (!doc.is_object()) throw ConfigError(config_path + ": config must be a JSON object");
    }
    for (const auto& [key, opt] : override_opts) {
      if (opt->count()) set_config_value(doc, key, overrides[key]);
    }
    if (jobs) doc["jobs"] = jobs;
    if (!out_dir.empty()) doc["out"] = out_dir;
    if (overlay) doc["overlay"] = true;
    if (!thresholds.empty()) doc["thresholds"] = parse_thresholds(thresholds);
    if (!ocr_file.empty() && !ocr_url.empty()) throw ConfigError("--ocr-file and --ocr-url are mutually exclusive");
    if (!ocr_file.empty()) {
      doc["ocr"]["mode"] = "file";
      doc["ocr"]["path"] = ocr_file;
    }
    if (!ocr_url.empty()) {
      doc["ocr"]["mode"] = "http";
      doc["ocr"]["url"] = ocr_url;
    }
    cfg = config_from_json(doc);
    if (!metadata.empty() && (!ocr_file.empty() || !ocr_url.empty())) {
      throw ConfigError("--metadata-widgets skips detection; do not combine it with an OCR source");
    }

    if (*run) return cmd_run(run_inputs, cfg, metadata);
    if (*eval) return cmd_eval(pred_dir, gt_dir, cfg);
    if (*synth) return cmd_synth(synth_args, cfg);
    if (*render) return cmd_render(render_image, render_hierarchy, cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitOk;
}
