// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/commands.hpp"

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <utility>

#include "specedit/containers.hpp"
#include "specedit/demo.hpp"
#include "specedit/editing.hpp"
#include "specedit/error.hpp"
#include "specedit/fit.hpp"
#include "specedit/spectral.hpp"
#include "specedit/toy_model.hpp"

namespace specedit::cli {
namespace {

namespace fs = std::filesystem;

constexpr int kTopRatios = 10;

struct ConfigFlags {
  std::vector<double> k;
  std::string layers;
  std::string mode;
  std::string merge;
  std::string feature;
  std::string preset;
  std::optional<double> alpha;
  std::optional<double> epsilon;
  bool center = false;
};

void add_edit_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("--layers", f.layers, "Layer selection: N, top:N, bottom:N or ids:a,b,c");
  cmd->add_option("--mode", f.mode, "both | positive-only | negative-only | reverse");
  cmd->add_option("--merge", f.merge, "norm-rescale | average");
  cmd->add_option("--feature", f.feature, "identity | squared-exponential | tanh | elu");
  cmd->add_option("--alpha", f.alpha, "Feature-map alpha");
  cmd->add_option("--epsilon", f.epsilon, "Pseudo-inverse clamp margin");
}

void add_fit_flags(CLI::App* cmd, ConfigFlags& f, bool sweep) {
  add_edit_flags(cmd, f);
  auto* k = cmd->add_option("--k", f.k, "Explained-variance threshold K in (0, 1]");
  k->delimiter(',')->allow_extra_args(false);
  if (!sweep) k->expected(1);
  cmd->add_flag("--center", f.center, "Subtract sample means before forming covariances");
  cmd->add_option("--preset", f.preset, "truthfulness (K=0.998, top 21) | fairness (K=0.999, top 3)")
      ->check(CLI::IsMember({"truthfulness", "fairness"}));
}

EditConfig apply_flags(const ConfigFlags& f, EditConfig config) {
  if (f.preset == "truthfulness") {
    const EditConfig preset;
    config.explained_variance = preset.explained_variance;
    config.layers = preset.layers;
  } else if (f.preset == "fairness") {
    const EditConfig preset = EditConfig::fairness();
    config.explained_variance = preset.explained_variance;
    config.layers = preset.layers;
  }
  if (f.k.size() == 1) config.explained_variance = f.k.front();
  if (!f.layers.empty()) config.layers = parse_layer_selection(f.layers);
  if (!f.mode.empty()) config.mode = parse_mode(f.mode);
  if (!f.merge.empty()) config.merge = parse_merge(f.merge);
  if (!f.feature.empty()) config.feature.kind = parse_feature_kind(f.feature);
  if (f.alpha) config.feature.alpha = *f.alpha;
  if (f.epsilon) config.feature.epsilon = *f.epsilon;
  if (f.center) config.center = true;
  config.validate();
  return config;
}

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ValidationError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t seed_from_environment() {
  const char* raw = std::getenv(kSeedEnv);
  if (raw == nullptr || *raw == '\0') return 0;
  const std::string_view text(raw);
  std::uint64_t seed = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ValidationError(std::string(kSeedEnv) + " must be an unsigned integer, got '" +
                          std::string(text) + "'");
  }
  return seed;
}

std::string format_number(double value, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << value;
  return s.str();
}

std::string join_ints(std::span<const int> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

fs::path sweep_path(const fs::path& output, double k, std::size_t count) {
  if (count == 1) return output;
  fs::path path = output.parent_path() / output.stem();
  path += ".k" + format_number(k);
  path += output.extension();
  return path;
}

void print_ratios(std::ostream& out, std::string_view label, const Vector& sigma) {
  out << "  " << label;
  if (sigma.size() == 0 || sigma[0] == 0.0) {
    out << " (all zero)\n";
    return;
  }
  const Vector ratios = explained_variance_ratios(as_span(sigma));
  const Index shown = std::min<Index>(kTopRatios, ratios.size());
  for (Index i = 0; i < shown; ++i) out << ' ' << format_number(ratios[i]);
  out << '\n';
}

void print_fit_report(std::ostream& out, const fs::path& path, const ProjectionBundle& bundle) {
  const EditConfig& c = bundle.fit_config;
  out << "wrote " << path.string() << " (K=" << format_number(c.explained_variance)
      << ", mode " << mode_tag(c.mode) << ", feature " << feature_tag(c.feature.kind) << ")\n";
  for (const LayerProjection& p : bundle.layers) {
    out << "layer " << p.layer << ": k+=" << p.k_plus << " k-=" << p.k_minus << '\n';
    print_ratios(out, "ratios+", p.sigma_plus);
    print_ratios(out, "ratios-", p.sigma_minus);
  }
}

// --- fit -------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string output;
  ConfigFlags flags;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const ActivationSet set = load_activation_set(a.input);
  EditConfig config = apply_flags(a.flags, EditConfig{});
  std::vector<double> ks = a.flags.k;
  if (ks.empty()) ks.push_back(config.explained_variance);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (ks[i] == ks[j]) throw ValidationError("duplicate K value " + format_number(ks[i]));
    }
  }

  // Every bundle is fitted before the first one is written.
  std::vector<std::pair<fs::path, ProjectionBundle>> results;
  for (double k : ks) {
    config.explained_variance = k;
    config.validate();
    results.emplace_back(sweep_path(a.output, k, ks.size()), fit_bundle(set, config));
  }
  for (const auto& [path, bundle] : results) {
    save_projection_bundle(bundle, path);
    print_fit_report(out, path, bundle);
  }
  return kExitOk;
}

// --- edit ------------------------------------------------------------------

struct EditArgs {
  std::string input;
  std::string bundle;
  std::string output;
  std::string window = "full";
  ConfigFlags flags;
};

int cmd_edit(const EditArgs& a, std::ostream& out) {
  auto bundle = std::make_shared<const ProjectionBundle>(load_projection_bundle(a.bundle));
  ActivationSet set = load_activation_set(a.input);
  if (set.width() != bundle->width) {
    throw ValidationError("width mismatch: activations have d=" + std::to_string(set.width()) +
                          ", bundle has d=" + std::to_string(bundle->width));
  }
  const EditConfig config = apply_flags(a.flags, bundle->fit_config);
  const Editor editor(bundle, config);
  const NormWindow window = a.window == "incremental" ? NormWindow::incremental
                                                      : NormWindow::full_sequence;

  out << "layer,edited,mean_edit_norm\n";
  for (std::size_t i = 0; i < set.layer_ids.size(); ++i) {
    const int layer = set.layer_ids[i];
    double total = 0.0;
    Index columns = 0;
    for (Role role : kAllRoles) {
      MatrixF& samples = set.layers[i].get(role);
      const Matrix original = samples.cast<double>();
      const Matrix edited = editor.edit_sequence(layer, original, window);
      total += (edited - original).colwise().norm().sum();
      columns += original.cols();
      samples = edited.cast<float>();
    }
    out << layer << ',' << (editor.edits(layer) ? "yes" : "no") << ','
        << std::setprecision(17) << (columns > 0 ? total / static_cast<double>(columns) : 0.0)
        << '\n';
  }
  set.meta["edit.mode"] = std::string(mode_tag(config.mode));
  set.meta["edit.window"] = window == NormWindow::incremental ? "incremental" : "full";
  save_activation_set(set, a.output);
  out << "wrote " << a.output << '\n';
  return kExitOk;
}

// --- signature -------------------------------------------------------------

struct SignatureArgs {
  std::string input;
  std::string format = "table";
};

int cmd_signature(const SignatureArgs& a, std::ostream& out) {
  const SignatureResult sig = layer_signatures(load_activation_set(a.input));
  const bool defined = sig.normalized.has_value();
  if (a.format == "csv") {
    if (!defined) out << "# normalized: undefined\n";
    out << (defined ? "layer,raw,normalized\n" : "layer,raw\n");
    out << std::setprecision(17);
    for (std::size_t i = 0; i < sig.layers.size(); ++i) {
      out << sig.layers[i] << ',' << sig.raw[i];
      if (defined) out << ',' << (*sig.normalized)[i];
      out << '\n';
    }
    return kExitOk;
  }
  out << "labels: " << sig.label_rows << " x " << sig.label_cols << " one-hot\n";
  out << std::setw(6) << "layer" << std::setw(16) << "raw";
  if (defined) out << std::setw(12) << "normalized";
  out << '\n';
  for (std::size_t i = 0; i < sig.layers.size(); ++i) {
    out << std::setw(6) << sig.layers[i] << std::setw(16) << format_number(sig.raw[i]);
    if (defined) out << std::setw(12) << format_number((*sig.normalized)[i], 4);
    out << '\n';
  }
  if (!defined) out << "normalized: undefined (every signature is zero)\n";
  return kExitOk;
}

// --- inspect ---------------------------------------------------------------

struct InspectArgs {
  std::string input;
  std::string side = "plus";
  bool center = false;
};

void print_ratio_row(std::ostream& out, int layer, const Vector& sigma) {
  out << layer;
  const Vector ratios = explained_variance_ratios(as_span(sigma));
  for (Index i = 0; i < ratios.size(); ++i) out << ',' << ratios[i];
  out << '\n';
}

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
  std::string magic;
  {
    std::ifstream probe(a.input, std::ios::binary);
    if (!probe) throw ValidationError("cannot open '" + a.input + "'");
    magic = peek_magic(probe);
  }
  const bool plus = a.side == "plus";
  out << std::setprecision(17);
  if (magic == kActivationMagic) {
    const ActivationSet set = load_activation_set(a.input);
    for (std::size_t i = 0; i < set.layer_ids.size(); ++i) {
      const LayerSamples& s = set.layers[i];
      const Matrix omega = cross_covariance(s.neutral.cast<double>(),
                                            (plus ? s.positive : s.negative).cast<double>(),
                                            a.center);
      print_ratio_row(out, set.layer_ids[i], svd(omega).sigma);
    }
    return kExitOk;
  }
  if (magic == kBundleMagic) {
    if (a.center) throw ValidationError("--center applies to activation sets only");
    const ProjectionBundle bundle = load_projection_bundle(a.input);
    for (const LayerProjection& p : bundle.layers) {
      print_ratio_row(out, p.layer, plus ? p.sigma_plus : p.sigma_minus);
    }
    return kExitOk;
  }
  throw FormatError("'" + a.input + "' is neither an activation set nor a projection bundle");
}

// --- demo ------------------------------------------------------------------

struct DemoArgs {
  std::optional<std::uint64_t> seed;
  ConfigFlags flags;
  Index demonstrations = 200;
  int eval_prompts = 200;
  std::string write_set;
  std::string write_model;
  std::string write_bundle;
};

int cmd_demo(const DemoArgs& a, std::ostream& out) {
  DemoOptions options;
  options.seed = a.seed ? *a.seed : seed_from_environment();
  options.edit = apply_flags(a.flags, DemoOptions::default_edit());
  options.demonstrations = a.demonstrations;
  options.eval_prompts = a.eval_prompts;
  if (options.demonstrations < 1 || options.eval_prompts < 1) {
    throw ValidationError("--demonstrations and --eval-prompts must be positive");
  }

  const DemoArtifacts artifacts = build_demo(options);
  if (!a.write_set.empty()) save_activation_set(artifacts.demonstrations, a.write_set);
  if (!a.write_model.empty()) save_toy_model(artifacts.model, a.write_model);
  if (!a.write_bundle.empty()) save_projection_bundle(artifacts.bundle, a.write_bundle);

  const DemoReport report = evaluate_demo(artifacts, options);
  out << "seed " << options.seed << ", mode " << mode_tag(options.edit.mode) << ", feature "
      << feature_tag(options.edit.feature.kind) << ", K=" << format_number(options.edit.explained_variance)
      << '\n';
  out << "injection layer " << artifacts.behavior.injection_layer << ", edited layers "
      << join_ints(report.edited_layers) << '\n';
  for (std::size_t i = 0; i < report.edited_layers.size(); ++i) {
    out << "layer " << report.edited_layers[i] << ": k+=" << report.k_plus[i]
        << " k-=" << report.k_minus[i] << '\n';
  }
  out << "mean edit norm " << format_number(report.stats.mean_edit_norm) << '\n';
  out << report.summary << '\n';
  return report.pass ? kExitOk : kExitInvalid;
}

}  // namespace

LayerSelection parse_layer_selection(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return LayerSelection::top(parse_int(text, "layer count"));
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (kind == "top") return LayerSelection::top(parse_int(rest, "layer count"));
  if (kind == "bottom") return LayerSelection::bottom(parse_int(rest, "layer count"));
  if (kind == "ids") {
    std::vector<int> ids;
    std::istringstream items(rest);
    for (std::string item; std::getline(items, item, ',');) ids.push_back(parse_int(item, "layer id"));
    if (ids.empty()) throw ValidationError("empty layer id list");
    std::sort(ids.begin(), ids.end());
    return LayerSelection::explicit_layers(std::move(ids));
  }
  throw ValidationError("unknown layer selection '" + text + "' (use N, top:N, bottom:N or ids:a,b)");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral editing of transformer activations", "specedit"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit editing projections from an activation set");
  fit->add_option("input", fit_args.input, "Activation set (.sead)")->required();
  fit->add_option("-o,--output", fit_args.output, "Bundle path (.seap); one file per K")->required();
  add_fit_flags(fit, fit_args.flags, true);

  EditArgs edit_args;
  auto* edit = app.add_subcommand("edit", "Apply a bundle to every sample of an activation set");
  edit->add_option("input", edit_args.input, "Activation set (.sead)")->required();
  edit->add_option("-b,--bundle", edit_args.bundle, "Projection bundle (.seap)")->required();
  edit->add_option("-o,--output", edit_args.output, "Edited activation set (.sead)")->required();
  edit->add_option("--window", edit_args.window, "Norm window: full | incremental")
      ->check(CLI::IsMember({"full", "incremental"}));
  add_edit_flags(edit, edit_args.flags);

  SignatureArgs sig_args;
  auto* sig = app.add_subcommand("signature", "Per-layer behaviour signatures");
  sig->add_option("input", sig_args.input, "Activation set (.sead)")->required();
  sig->add_option("--format", sig_args.format, "table | csv")->check(CLI::IsMember({"table", "csv"}));

  InspectArgs inspect_args;
  auto* inspect = app.add_subcommand("inspect", "Explained-variance ratios per layer");
  inspect->add_option("input", inspect_args.input, "Activation set or projection bundle")->required();
  inspect->add_option("--side", inspect_args.side, "plus | minus")
      ->check(CLI::IsMember({"plus", "minus"}));
  inspect->add_flag("--center", inspect_args.center, "Centre activation sets first");

  DemoArgs demo_args;
  auto* demo = app.add_subcommand("demo", "Synthetic generate, fit, edit and measure run");
  demo->add_option("--seed", demo_args.seed, std::string("Seed (default: $") + kSeedEnv + " or 0)");
  add_fit_flags(demo, demo_args.flags, false);
  demo->add_option("--demonstrations", demo_args.demonstrations, "Demonstration triplets");
  demo->add_option("--eval-prompts", demo_args.eval_prompts, "Held-out prompts");
  demo->add_option("--write-set", demo_args.write_set, "Save the demonstrations (.sead)");
  demo->add_option("--write-model", demo_args.write_model, "Save the toy model (.seam)");
  demo->add_option("--write-bundle", demo_args.write_bundle, "Save the fitted bundle (.seap)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_args, out);
    if (edit->parsed()) return cmd_edit(edit_args, out);
    if (sig->parsed()) return cmd_signature(sig_args, out);
    if (inspect->parsed()) return cmd_inspect(inspect_args, out);
    if (demo->parsed()) return cmd_demo(demo_args, out);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace specedit::cli
