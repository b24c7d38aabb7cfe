#pragma once

// The `furnish` command-line tool: train, eval, baseline, reward, render and
// ablate. Kept in a header so other binaries can drive it in-process.
//
// Precedence for run settings: built-in defaults < --config file < flags.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "furnish/baselines.hpp"
#include "furnish/checkpoint.hpp"
#include "furnish/env.hpp"
#include "furnish/layout_io.hpp"
#include "furnish/ppo.hpp"
#include "furnish/render.hpp"

namespace furnish::cli {

namespace fs = std::filesystem;

inline constexpr const char* kRunsRootEnv = "FURNISH_RUNS_ROOT";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  std::string room = "square";     // square | rectangle | l_shape | u_shape | mixed
  std::string furniture = "4";     // 4 | 6 | 8 | mixed
  std::string order = "desc";      // desc | asc
  std::vector<std::string> disabled_rewards;
  double penalty = -10.0;
  double resolution = 0.1;
  std::string room_file;     // optional; replaces the room preset
  std::string catalog_file;  // optional; replaces the default catalog
  ppo::TrainConfig train;

  GuidelineMask mask() const {
    std::array<bool, 6> on;
    on.fill(true);
    for (const auto& r : disabled_rewards) on[static_cast<int>(parse_guideline(r))] = false;
    return GuidelineMask(on);
  }

  void validate() const {
    if (room != "mixed" && room != "square" && room != "rectangle" && room != "l_shape" && room != "u_shape")
      throw UsageError("--room must be square, rectangle, l_shape, u_shape or mixed");
    if (furniture != "mixed" && furniture != "4" && furniture != "6" && furniture != "8")
      throw UsageError("--furniture must be 4, 6, 8 or mixed");
    if (order != "desc" && order != "asc") throw UsageError("--order must be desc or asc");
    if (!room_file.empty() && room == "mixed") throw UsageError("a room file cannot be combined with --room mixed");
    if (!std::isfinite(penalty)) throw UsageError("penalty must be finite");
    if (!(resolution > 0.0)) throw UsageError("resolution must be positive");
    (void)mask();
    train.validate();
  }
};

inline json to_json(const RunConfig& c) {
  return {{"room", c.room},
          {"furniture", c.furniture},
          {"order", c.order},
          {"disabled_rewards", c.disabled_rewards},
          {"penalty", c.penalty},
          {"resolution", c.resolution},
          {"room_file", c.room_file},
          {"catalog_file", c.catalog_file},
          {"train", ppo::to_json(c.train)}};
}

/// Overrides fields present in `j`. A run manifest is accepted too (its
/// "config" block is used).
inline RunConfig run_config_from_json(const json& in, RunConfig c = {}) {
  const json& j = in.contains("config") && in.at("config").is_object() ? in.at("config") : in;
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "room") c.room = v.get<std::string>();
      else if (k == "furniture") c.furniture = v.is_number() ? std::to_string(v.get<int>()) : v.get<std::string>();
      else if (k == "order") c.order = v.get<std::string>();
      else if (k == "disabled_rewards") c.disabled_rewards = v.get<std::vector<std::string>>();
      else if (k == "penalty") c.penalty = v.get<double>();
      else if (k == "resolution") c.resolution = v.get<double>();
      else if (k == "room_file") c.room_file = v.get<std::string>();
      else if (k == "catalog_file") c.catalog_file = v.get<std::string>();
      else if (k == "train") c.train = ppo::train_config_from_json(v, c.train);
      else throw UsageError("unknown config key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

/// One environment per (room, furniture count) combination of the config.
inline ppo::EnvPool build_envs(const RunConfig& c, std::optional<GuidelineMask> mask_override = {}) {
  c.validate();
  auto catalog = std::make_shared<const Catalog>(c.catalog_file.empty() ? default_catalog()
                                                                        : load_catalog(c.catalog_file));
  std::vector<Room> rooms;
  if (!c.room_file.empty()) rooms.push_back(load_room(c.room_file));
  else if (c.room == "mixed")
    for (auto s : {RoomShape::square, RoomShape::rectangle, RoomShape::l_shape, RoomShape::u_shape})
      rooms.push_back(room_preset(s));
  else rooms.push_back(room_preset(parse_room_shape(c.room)));
  std::vector<int> counts = c.furniture == "mixed" ? std::vector<int>{4, 6, 8} : std::vector<int>{std::stoi(c.furniture)};
  ppo::EnvPool pool;
  for (const auto& room : rooms)
    for (int n : counts) {
      EpisodeConfig e;
      e.room = room;
      e.catalog = catalog;
      e.furniture_ids = furniture_preset(n);
      e.order = c.order == "asc" ? PlacementOrder::ascending : PlacementOrder::descending;
      e.mask = mask_override.value_or(c.mask());
      e.penalty = c.penalty;
      e.resolution = c.resolution;
      e.seed = c.train.seed;
      pool.emplace_back(std::move(e));
    }
  return pool;
}

// ---------------------------------------------------------------------------
// Files

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Writes through a temporary file and a rename so readers never see a partial file.
inline void write_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

/// Relative output directories land under $FURNISH_RUNS_ROOT when it is set.
inline fs::path resolve_out_dir(const std::string& out) {
  fs::path p(out);
  if (p.is_relative())
    if (const char* root = std::getenv(kRunsRootEnv); root && *root) p = fs::path(root) / p;
  const fs::path parent = p.parent_path();
  if (!parent.empty() && !fs::is_directory(parent))
    throw UsageError("parent directory of '" + p.string() + "' does not exist");
  fs::create_directories(p);
  return p;
}

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string metrics_header() { return "epoch,mean_reward,p_loss,v_loss\n"; }
inline std::string metrics_row(const ppo::EpochMetrics& m) {
  return std::to_string(m.epoch) + "," + fmt_num(m.mean_reward) + "," + fmt_num(m.p_loss) + "," +
         fmt_num(m.v_loss) + "\n";
}

// ---------------------------------------------------------------------------
// Shared flag helpers

struct SceneFlags {
  std::string config_path;
  std::string room, furniture, order, room_file, catalog_file;
  std::vector<std::string> disable;
  std::optional<std::uint64_t> seed;
  bool no_spatial = false;

  void add(CLI::App* app, bool spatial_flag) {
    app->add_option("--config", config_path, "JSON run config (a run manifest works too)");
    app->add_option("--room", room, "square, rectangle, l_shape, u_shape or mixed");
    app->add_option("--furniture", furniture, "4, 6, 8 or mixed");
    app->add_option("--order", order, "placement order: desc or asc");
    app->add_option("--disable-reward", disable, "pair, access, vis, path, balance or align (repeatable)");
    app->add_option("--room-file", room_file, "room JSON replacing the preset");
    app->add_option("--catalog-file", catalog_file, "catalog JSON replacing the default catalog");
    app->add_option("--seed", seed, "random seed");
    if (spatial_flag) app->add_flag("--no-spatial-encoding", no_spatial, "zero the occupancy-map branch");
  }

  RunConfig resolve(RunConfig base = {}) const {
    RunConfig c = config_path.empty() ? base : run_config_from_json(detail::read_json_file(config_path), base);
    if (!room.empty()) c.room = room;
    if (!furniture.empty()) c.furniture = furniture;
    if (!order.empty()) c.order = order;
    if (!room_file.empty()) c.room_file = room_file;
    if (!catalog_file.empty()) c.catalog_file = catalog_file;
    if (seed) c.train.seed = *seed;
    if (no_spatial) c.train.spatial_encoding = false;
    try {
      for (const auto& d : disable) {
        parse_guideline(d);
        if (std::find(c.disabled_rewards.begin(), c.disabled_rewards.end(), d) == c.disabled_rewards.end())
          c.disabled_rewards.push_back(d);
      }
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return c;
  }
};

// ---------------------------------------------------------------------------
// train

struct TrainOutcome {
  fs::path dir;
  ppo::TrainResult result;
};

inline TrainOutcome run_training(const RunConfig& cfg, const fs::path& dir, const std::vector<std::string>& argv,
                                 std::ostream& log) {
  const std::string started = utc_now();
  const auto envs = build_envs(cfg);
  const fs::path metrics_path = dir / "metrics.csv", timing_path = dir / "timing.csv";
  std::ofstream metrics(metrics_path, std::ios::binary | std::ios::trunc), timing(timing_path, std::ios::trunc);
  if (!metrics || !timing) throw std::runtime_error("cannot write metrics into '" + dir.string() + "'");
  metrics << metrics_header();
  timing << "epoch,time_s\n";
  const int every = std::max(1, cfg.train.epochs / 20);
  auto result = ppo::train(envs, cfg.train, {}, [&](const ppo::EpochMetrics& m) {
    metrics << metrics_row(m) << std::flush;
    timing << m.epoch << "," << fmt_num(m.wall_time_s) << "\n";
    if (m.epoch % every == 0 || m.epoch + 1 == cfg.train.epochs)
      log << "epoch " << m.epoch << "  reward " << fmt_num(m.mean_reward) << "  p_loss " << fmt_num(m.p_loss)
          << "  v_loss " << fmt_num(m.v_loss) << "  invalid " << fmt_num(m.invalid_rate) << "\n";
  });
  nn::Checkpoint ck{result.params, result.adam, {{"run_config", to_json(cfg)}}};
  nn::save_checkpoint((dir / "checkpoint.bin").string(), ck);
  json manifest = {{"command", "train"},
                   {"argv", argv},
                   {"config", to_json(cfg)},
                   {"seed", cfg.train.seed},
                   {"started_at", started},
                   {"finished_at", utc_now()},
                   {"epochs_completed", result.metrics.size()},
                   {"artifacts",
                    {{"checkpoint", "checkpoint.bin"}, {"metrics", "metrics.csv"}, {"timing", "timing.csv"}}}};
  write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  return {dir, std::move(result)};
}

// ---------------------------------------------------------------------------
// eval

inline json eval_stats_json(const ppo::EvalStats& s) {
  json comp;
  for (std::size_t i = 0; i < 6; ++i) comp[std::string(kGuidelineNames[i])] = s.mean_components[i];
  return {{"episodes", s.episodes.size()},     {"mean_reward", s.mean_reward}, {"invalid_rate", s.invalid_rate},
          {"mean_length", s.mean_length},      {"mean_time_s", s.mean_time_s}, {"wall_time_s", s.wall_time_s},
          {"mean_components", comp}};
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Furniture layout workbench", "furnish"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train a placement policy with PPO");
  SceneFlags train_scene;
  train_scene.add(train, true);
  std::optional<int> epochs;
  std::string train_out;
  train->add_option("--epochs", epochs, "training epochs");
  train->add_option("--out", train_out, "run directory")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  SceneFlags eval_scene;
  eval_scene.add(eval, false);
  std::string ckpt_path, render_dir;
  int eval_episodes = 100;
  bool eval_sample = false;
  eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval->add_option("--episodes", eval_episodes, "episodes to run")->check(CLI::PositiveNumber);
  eval->add_option("--render", render_dir, "write one SVG and layout.json per episode here");
  eval->add_flag("--sample", eval_sample, "sample actions instead of taking the mean");

  // baseline
  auto* base = app.add_subcommand("baseline", "run a search baseline");
  SceneFlags base_scene;
  base_scene.add(base, false);
  std::string algo, base_out;
  int budget = 20000;
  base->add_option("--algo", algo, "mh, pso or random")->required()->check(CLI::IsMember({"mh", "pso", "random"}));
  base->add_option("--budget", budget, "score evaluations")->check(CLI::PositiveNumber);
  base->add_option("--out", base_out, "directory for layout.json and layout.svg");

  // reward
  auto* reward = app.add_subcommand("reward", "score a layout.json");
  std::string reward_layout;
  std::vector<std::string> reward_disable;
  double reward_res = 0.1;
  reward->add_option("--layout", reward_layout, "layout file")->required();
  reward->add_option("--disable-reward", reward_disable, "exclude from the composite (repeatable)");
  reward->add_option("--resolution", reward_res, "pathfinding grid resolution (m)")->check(CLI::PositiveNumber);

  // render
  auto* render = app.add_subcommand("render", "draw a layout.json as SVG");
  std::string render_layout, render_out;
  RenderOptions ropt;
  bool no_centers = false, no_fronts = false, no_labels = false;
  render->add_option("--layout", render_layout, "layout file")->required();
  render->add_option("--out", render_out, "SVG path (stdout when omitted)");
  render->add_flag("--show-access", ropt.show_access, "draw clearance strips");
  render->add_flag("--no-centers", no_centers, "hide room center and layout centroid");
  render->add_flag("--no-fronts", no_fronts, "hide front arrows");
  render->add_flag("--no-labels", no_labels, "hide item labels");
  render->add_option("--scale", ropt.scale, "pixels per meter")->check(CLI::PositiveNumber);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "train and evaluate the ablation variants");
  SceneFlags abl_scene;
  abl_scene.add(ablate, false);
  std::optional<int> abl_epochs;
  int abl_seeds = 3, abl_episodes = 20;
  std::string abl_out;
  std::vector<std::string> variants{"full", "no_functional", "no_visual", "asc", "no_spatial"};
  ablate->add_option("--epochs", abl_epochs, "training epochs per variant");
  ablate->add_option("--seeds", abl_seeds, "seeds per variant")->check(CLI::PositiveNumber);
  ablate->add_option("--episodes", abl_episodes, "evaluation episodes")->check(CLI::PositiveNumber);
  ablate->add_option("--variants", variants, "subset of full, no_functional, no_visual, asc, no_spatial")
      ->check(CLI::IsMember({"full", "no_functional", "no_visual", "asc", "no_spatial"}));
  ablate->add_option("--out", abl_out, "output directory")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*train) {
      RunConfig cfg = train_scene.resolve();
      if (epochs) cfg.train.epochs = *epochs;
      cfg.validate();
      const fs::path dir = resolve_out_dir(train_out);
      run_training(cfg, dir, args, out);
      out << "wrote " << (dir / "manifest.json").string() << "\n";
      return 0;
    }

    if (*eval) {
      const nn::Checkpoint ck = nn::load_checkpoint(ckpt_path);
      RunConfig stored;
      if (ck.metadata.contains("run_config")) stored = run_config_from_json(ck.metadata.at("run_config"));
      const RunConfig cfg = eval_scene.resolve(stored);
      const auto envs = build_envs(cfg);
      ppo::EvalConfig ec{eval_episodes, !eval_sample, cfg.train.seed, cfg.train.spatial_encoding};
      const auto stats = ppo::evaluate(ck.params, envs, ec);
      if (!render_dir.empty()) {
        const fs::path dir = resolve_out_dir(render_dir);
        for (std::size_t i = 0; i < stats.episodes.size(); ++i) {
          const auto& ep = stats.episodes[i];
          const Room& room = envs[ep.env_index].config().room;
          char name[32];
          std::snprintf(name, sizeof name, "episode_%04zu", i);
          write_text(dir / (std::string(name) + ".svg"), render_svg(ep.placed, room));
          json lj = layout_to_json(ep.placed, room);
          lj["meta"] = {{"final_reward", ep.final_reward}, {"invalid", ep.invalid}};
          if (ep.breakdown) lj["breakdown"] = to_json(*ep.breakdown);
          write_text(dir / (std::string(name) + ".json"), lj.dump(2) + "\n");
        }
      }
      out << eval_stats_json(stats).dump(2) << "\n";
      return 0;
    }

    if (*base) {
      const RunConfig cfg = base_scene.resolve();
      if (cfg.room == "mixed" || cfg.furniture == "mixed") throw UsageError("baselines need a fixed room and furniture count");
      const auto envs = build_envs(cfg);
      const LayoutEnv& env = envs.front();
      const baselines::SearchBudget b{budget, cfg.train.seed};
      baselines::SearchResult r;
      if (algo == "mh") r = baselines::mh_optimize(env, b);
      else if (algo == "pso") r = baselines::pso_optimize(env, b);
      else if (algo == "random") r = baselines::random_search(env, b);
      else throw UsageError("unknown algorithm '" + algo + "'");
      json report = {{"algo", algo},
                     {"best_score", r.best_score()},
                     {"evaluations", r.evaluations},
                     {"invalid_items", r.detail.invalid},
                     {"wall_time_s", r.wall_time_s},
                     {"breakdown", to_json(r.detail.breakdown)}};
      if (!base_out.empty()) {
        const fs::path dir = resolve_out_dir(base_out);
        json lj = layout_to_json(r.detail.placed, env.config().room);
        lj["breakdown"] = to_json(r.detail.breakdown);
        lj["meta"] = {{"algo", algo}, {"best_score", r.best_score()}, {"seed", cfg.train.seed}, {"budget", budget}};
        write_text(dir / "layout.json", lj.dump(2) + "\n");
        write_text(dir / "layout.svg", render_svg(r.detail.placed, env.config().room));
        report["layout"] = (dir / "layout.json").string();
        report["svg"] = (dir / "layout.svg").string();
      }
      out << report.dump(2) << "\n";
      return 0;
    }

    if (*reward) {
      const LayoutDocument doc = load_layout(reward_layout);
      RunConfig masked;
      masked.disabled_rewards = reward_disable;
      GuidelineMask mask;
      try {
        mask = masked.mask();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const RewardBreakdown b = composite_reward(doc.items, *doc.catalog, doc.room, reward_res, mask);
      bool valid = true;
      for (std::size_t i = 0; i < doc.items.size(); ++i)
        valid = valid && valid_placement(doc.items[i].footprint, std::span(doc.items).first(i), doc.room);
      json j = to_json(b);
      j["valid"] = valid;
      j["items"] = doc.items.size();
      out << j.dump(2) << "\n";
      return 0;
    }

    if (*render) {
      const LayoutDocument doc = load_layout(render_layout);
      ropt.show_centers = !no_centers;
      ropt.show_fronts = !no_fronts;
      ropt.show_labels = !no_labels;
      const std::string svg = render_svg(doc.items, doc.room, ropt, doc.catalog.get());
      if (render_out.empty()) out << svg;
      else write_text(render_out, svg);
      return 0;
    }

    if (*ablate) {
      RunConfig base_cfg = abl_scene.resolve();
      if (abl_epochs) base_cfg.train.epochs = *abl_epochs;
      const fs::path dir = resolve_out_dir(abl_out);
      std::string csv = "variant,seed,mean_reward,functional,visual,invalid_rate\n";
      json rows = json::array();
      for (const auto& v : variants) {
        for (int s = 0; s < abl_seeds; ++s) {
          RunConfig c = base_cfg;
          c.train.seed = base_cfg.train.seed + static_cast<std::uint64_t>(s);
          if (v == "no_functional") c.disabled_rewards = {"pair", "access", "vis", "path"};
          if (v == "no_visual") c.disabled_rewards = {"balance", "align"};
          if (v == "asc") c.order = "asc";
          if (v == "no_spatial") c.train.spatial_encoding = false;
          const fs::path run_dir = dir / (v + "_seed" + std::to_string(c.train.seed));
          fs::create_directories(run_dir);
          out << "== " << v << " seed " << c.train.seed << "\n";
          const auto tr = run_training(c, run_dir, args, out);
          auto eval_cfg = c;
          eval_cfg.disabled_rewards.clear();
          const auto stats = ppo::evaluate(tr.result.params, build_envs(eval_cfg, GuidelineMask{}),
                                           {abl_episodes, true, c.train.seed, c.train.spatial_encoding});
          const auto& mc = stats.mean_components;
          const double functional = (mc[0] + mc[1] + mc[2] + mc[3]) / 4.0;
          const double visual = (mc[4] + mc[5]) / 2.0;
          csv += v + "," + std::to_string(c.train.seed) + "," + fmt_num(stats.mean_reward) + "," +
                 fmt_num(functional) + "," + fmt_num(visual) + "," + fmt_num(stats.invalid_rate) + "\n";
          rows.push_back({{"variant", v}, {"seed", c.train.seed}, {"stats", eval_stats_json(stats)},
                          {"functional", functional}, {"visual", visual}});
        }
      }
      write_text(dir / "ablation.csv", csv);
      write_atomic(dir / "manifest.json", json{{"command", "ablate"}, {"argv", args}, {"config", to_json(base_cfg)},
                                               {"variants", variants}, {"results", rows}, {"finished_at", utc_now()}}
                                                  .dump(2) + "\n");
      out << csv;
      return 0;
    }
  } catch (const UsageError& e) {
    err << "furnish: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "furnish: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

inline int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}

}  // namespace furnish::cli
