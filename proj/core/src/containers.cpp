// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "specedit/containers.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "specedit/error.hpp"

namespace specedit {
namespace {

using nlohmann::json;

constexpr const char* kDtype = "f32le";
constexpr const char* kLayout = "column-major";
constexpr std::size_t kFeatureTagBytes = 16;

void require_field(const json& header, const char* key, const char* expected) {
  const auto it = header.find(key);
  if (it == header.end() || !it->is_string() || it->get<std::string>() != expected) {
    throw FormatError(std::string("header field '") + key + "' must be \"" + expected + "\"");
  }
}

void require_end(std::istream& source) {
  if (source.peek() != std::char_traits<char>::eof()) {
    throw FormatError("payload length mismatch: trailing bytes after payload");
  }
}

json selection_to_json(const LayerSelection& s) {
  const char* kind = s.kind == LayerSelection::Kind::top      ? "top"
                     : s.kind == LayerSelection::Kind::bottom ? "bottom"
                                                              : "explicit";
  return json{{"kind", kind}, {"count", s.count}, {"layers", s.layers}};
}

LayerSelection selection_from_json(const json& j) {
  LayerSelection s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "top") {
    s.kind = LayerSelection::Kind::top;
  } else if (kind == "bottom") {
    s.kind = LayerSelection::Kind::bottom;
  } else if (kind == "explicit") {
    s.kind = LayerSelection::Kind::explicit_list;
  } else {
    throw FormatError("unknown layer selection kind '" + kind + "'");
  }
  s.count = j.at("count").get<int>();
  s.layers = j.at("layers").get<std::vector<int>>();
  return s;
}

json fit_config_to_json(const EditConfig& c) {
  return json{{"explained_variance", c.explained_variance},
              {"layer_selection", selection_to_json(c.layers)},
              {"mode", std::string(mode_tag(c.mode))},
              {"merge", std::string(merge_tag(c.merge))},
              {"center", c.center}};
}

EditConfig fit_config_from_json(const json& j) {
  EditConfig c;
  c.explained_variance = j.at("explained_variance").get<double>();
  c.layers = selection_from_json(j.at("layer_selection"));
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.merge = parse_merge(j.at("merge").get<std::string>());
  c.center = j.at("center").get<bool>();
  return c;
}

void write_feature_block(detail::ByteWriter& w, const FeatureSpec& spec) {
  std::array<char, kFeatureTagBytes> tag{};
  // The long squared-exponential tag does not fit the fixed-width field.
  const std::string_view name =
      spec.kind == FeatureKind::squared_exponential ? "sqexp" : feature_tag(spec.kind);
  std::memcpy(tag.data(), name.data(), name.size());
  w.bytes(tag.data(), tag.size());
  w.f64(spec.alpha);
  w.f64(spec.epsilon);
}

FeatureSpec read_feature_block(detail::ByteReader& r) {
  std::array<char, kFeatureTagBytes> tag{};
  r.bytes(tag.data(), tag.size());
  const std::size_t len = std::find(tag.begin(), tag.end(), '\0') - tag.begin();
  FeatureSpec spec;
  try {
    spec.kind = parse_feature_kind(std::string_view(tag.data(), len));
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
  spec.alpha = r.f64();
  spec.epsilon = r.f64();
  return spec;
}

}  // namespace

std::uint64_t write_activation_set(const ActivationSet& set, std::ostream& sink) {
  set.validate();
  json meta = json::object();
  for (const auto& [key, value] : set.meta) meta[key] = value;
  const json header{{"d", set.width()},
                    {"n", set.count()},
                    {"layers", set.layer_ids},
                    {"roles", {"neutral", "positive", "negative"}},
                    {"dtype", kDtype},
                    {"layout", kLayout},
                    {"meta", meta}};
  detail::ByteWriter w(sink);
  detail::write_preamble(w, kActivationMagic, kActivationVersion, header);
  for (const LayerSamples& layer : set.layers) {
    for (Role role : kAllRoles) w.matrix(layer.get(role));
  }
  sink.flush();
  if (!sink) throw Error("write failed: sink rejected data");
  return w.written();
}

ActivationSet read_activation_set(std::istream& source) {
  detail::ByteReader r(source);
  const auto pre = detail::read_preamble(r, kActivationMagic, kActivationVersion);
  const json& h = pre.header;
  require_field(h, "dtype", kDtype);
  require_field(h, "layout", kLayout);
  if (h.value("roles", json()) != json{"neutral", "positive", "negative"}) {
    throw FormatError("header field 'roles' must be [neutral, positive, negative]");
  }
  const Index d = detail::json_index(h, "d", 1);
  const Index n = detail::json_index(h, "n", 1);

  ActivationSet set;
  try {
    set.layer_ids = h.at("layers").get<std::vector<int>>();
    for (const auto& [key, value] : h.at("meta").items()) {
      set.meta[key] = value.get<std::string>();
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed header: ") + e.what());
  }
  if (set.layer_ids.empty()) throw FormatError("header lists no layers");

  set.layers.reserve(set.layer_ids.size());
  for (std::size_t l = 0; l < set.layer_ids.size(); ++l) {
    LayerSamples samples;
    for (Role role : kAllRoles) samples.get(role) = r.matrix(d, n);
    set.layers.push_back(std::move(samples));
  }
  require_end(source);
  try {
    set.validate();
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
  return set;
}

std::uint64_t write_projection_bundle(const ProjectionBundle& bundle, std::ostream& sink) {
  // Read and write accept the same bundles.
  bundle.validate(kReadOrthonormalityTolerance);
  json layers = json::array();
  for (const LayerProjection& p : bundle.layers) {
    layers.push_back({{"layer", p.layer}, {"k_plus", p.k_plus}, {"k_minus", p.k_minus}});
  }
  const json header{{"d", bundle.width},
                    {"dtype", kDtype},
                    {"layout", kLayout},
                    {"fit_config", fit_config_to_json(bundle.fit_config)},
                    {"layers", layers}};
  detail::ByteWriter w(sink);
  detail::write_preamble(w, kBundleMagic, ProjectionBundle::kFormatVersion, header);
  write_feature_block(w, bundle.fit_config.feature);
  for (const LayerProjection& p : bundle.layers) {
    w.matrix(p.keep_plus);
    w.matrix(p.keep_minus);
    w.vector(p.sigma_plus);
    w.vector(p.sigma_minus);
  }
  sink.flush();
  if (!sink) throw Error("write failed: sink rejected data");
  return w.written();
}

ProjectionBundle read_projection_bundle(std::istream& source) {
  detail::ByteReader r(source);
  const auto pre = detail::read_preamble(r, kBundleMagic, ProjectionBundle::kFormatVersion);
  const json& h = pre.header;
  require_field(h, "dtype", kDtype);
  require_field(h, "layout", kLayout);

  ProjectionBundle bundle;
  bundle.format_version = pre.version;
  bundle.width = detail::json_index(h, "d", 1);
  const Index d = bundle.width;
  try {
    bundle.fit_config = fit_config_from_json(h.at("fit_config"));
    for (const json& entry : h.at("layers")) {
      LayerProjection p;
      p.layer = entry.at("layer").get<int>();
      p.k_plus = detail::json_index(entry, "k_plus", 1);
      p.k_minus = detail::json_index(entry, "k_minus", 0);
      if (p.k_plus > d || p.k_minus > d) throw FormatError("rank exceeds width");
      bundle.layers.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed header: ") + e.what());
  } catch (const FormatError&) {
    throw;
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
  bundle.fit_config.feature = read_feature_block(r);
  for (LayerProjection& p : bundle.layers) {
    p.keep_plus = r.matrix_d(d, p.k_plus);
    p.keep_minus = r.matrix_d(d, d - p.k_minus);
    p.sigma_plus = r.vector(d);
    p.sigma_minus = r.vector(d);
  }
  require_end(source);
  try {
    bundle.validate(kReadOrthonormalityTolerance);
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
  return bundle;
}

std::string peek_magic(std::istream& source) {
  const auto pos = source.tellg();
  std::string magic(4, '\0');
  source.read(magic.data(), 4);
  const auto got = source.gcount();
  source.clear();
  source.seekg(pos);
  magic.resize(static_cast<std::size_t>(got));
  return magic;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

ActivationSet load_activation_set(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_activation_set(in);
}

ProjectionBundle load_projection_bundle(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_projection_bundle(in);
}

void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& write) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw ValidationError("cannot create '" + tmp.string() + "'");
      write(out);
      out.flush();
      if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw;
  }
}

void save_activation_set(const ActivationSet& set, const std::filesystem::path& path) {
  write_file_atomically(path, [&](std::ostream& out) { write_activation_set(set, out); });
}

void save_projection_bundle(const ProjectionBundle& bundle, const std::filesystem::path& path) {
  write_file_atomically(path, [&](std::ostream& out) { write_projection_bundle(bundle, out); });
}

}  // namespace specedit
