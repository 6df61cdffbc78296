#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srl/adam.hpp"
#include "srl/decomposition.hpp"
#include "srl/errors.hpp"
#include "srl/model.hpp"
#include "srl/pruning.hpp"

namespace srl {

// Archive layout:
//
//   BIAFFINE-SRL-CHECKPOINT <version>\n
//   manifest <byte count>\n
//   <JSON manifest>\n
//   section <name> <rank> <extent>...\n      (one per parameter, then
//   <extent product x 8 bytes>\n              "adam.m.<name>"/"adam.v.<name>")
//   end\n
//
// Values are row-major little-endian IEEE-754 binary64.
inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointMagic = "BIAFFINE-SRL-CHECKPOINT";

struct Checkpoint {
  TaskMode mode = TaskMode::kConll2009;
  PruningConfig pruning;
  std::unique_ptr<SrlModel> model;
  std::optional<AdamState> optimizer;
  double best_dev_f1 = 0.0;
  std::uint64_t step = 0;
};

namespace detail {

inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return out;
  }
}

inline void write_section(std::ostream& out, const std::string& name, const Tensor& t) {
  out << "section " << name << ' ' << t.rank();
  for (std::size_t d : t.shape()) out << ' ' << d;
  out << '\n';
  for (double v : t.data()) {
    std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
  out << '\n';
}

inline nlohmann::json label_json(const LabelSpace& labels) {
  nlohmann::json out = nlohmann::json::array();
  for (const Label& l : labels.labels()) {
    const char* kind = l.kind == LabelKind::kNone ? "none"
                       : l.kind == LabelKind::kRole ? "role"
                                                    : "sense";
    out.push_back({{"name", l.name}, {"kind", kind}});
  }
  return out;
}

inline LabelSpace labels_from_json(const nlohmann::json& j) {
  std::vector<Label> labels;
  for (const auto& e : j) {
    const std::string kind = e.at("kind").get<std::string>();
    labels.push_back({e.at("name").get<std::string>(),
                      kind == "none" ? LabelKind::kNone
                      : kind == "role" ? LabelKind::kRole
                                       : LabelKind::kSense});
  }
  return LabelSpace(labels);
}

inline nlohmann::json adam_config_json(const AdamConfig& c) {
  auto text = [](long double v) {
    std::ostringstream s;
    s.precision(21);
    s << v;
    return s.str();
  };
  return {{"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon},
          {"learning_rate", text(c.learning_rate)},
          {"anneal_factor", text(c.anneal_factor)},
          {"anneal_period", c.anneal_period}};
}

inline AdamConfig adam_config_from_json(const nlohmann::json& j) {
  AdamConfig c;
  j.at("beta1").get_to(c.beta1);
  j.at("beta2").get_to(c.beta2);
  j.at("epsilon").get_to(c.epsilon);
  c.learning_rate = std::strtold(j.at("learning_rate").get<std::string>().c_str(), nullptr);
  c.anneal_factor = std::strtold(j.at("anneal_factor").get<std::string>().c_str(), nullptr);
  j.at("anneal_period").get_to(c.anneal_period);
  return c;
}

// Model-shape fields that must agree between a checkpoint and a run config.
inline std::optional<std::string> config_conflict(const ModelConfig& a, const ModelConfig& b) {
  nlohmann::json ja = a, jb = b;
  for (auto it = ja.begin(); it != ja.end(); ++it) {
    if (it.key() == "word_dropout" || it.key() == "recurrent_keep" || it.key() == "proj_keep" ||
        it.key() == "decode_mask") {
      continue;
    }
    if (jb.at(it.key()) != it.value()) return it.key();
  }
  return std::nullopt;
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  if (!ckpt.model) throw ArgumentError("checkpoint without a model");
  const SrlModel& m = *ckpt.model;
  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["mode"] = task_mode_name(ckpt.mode);
  manifest["pruning"] = {{"enabled", ckpt.pruning.enabled},
                         {"k", ckpt.pruning.k},
                         {"heads", head_source_name(ckpt.pruning.heads)}};
  manifest["config"] = m.config();
  manifest["labels"] = detail::label_json(m.labels());
  manifest["vocab"] = {{"forms", m.vocab().forms.strings()},
                       {"lemmas", m.vocab().lemmas.strings()},
                       {"pos", m.vocab().pos.strings()}};
  manifest["pretrained_keys"] = m.pretrained_keys().strings();
  manifest["lexicon"] = {{"predicate_lemmas", m.lexicon().predicate_lemmas},
                         {"default_sense", m.lexicon().default_sense}};
  manifest["seed"] = m.seed();
  manifest["best_dev_f1"] = ckpt.best_dev_f1;
  manifest["step"] = ckpt.step;
  nlohmann::json params = nlohmann::json::array();
  for (const Parameter& p : m.params()) {
    params.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"trainable", p.trainable}});
  }
  manifest["parameters"] = params;
  if (ckpt.optimizer) {
    manifest["optimizer"] = {{"config", detail::adam_config_json(ckpt.optimizer->config)},
                             {"step", ckpt.optimizer->step},
                             {"moments", !ckpt.optimizer->first_moment.empty()}};
  }
  const std::string text = manifest.dump(1);

  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "manifest " << text.size() << '\n' << text << '\n';
  for (const Parameter& p : m.params()) detail::write_section(out, p.name, p.value);
  if (ckpt.optimizer && !ckpt.optimizer->first_moment.empty()) {
    std::size_t k = 0;
    for (const Parameter& p : m.params()) {
      detail::write_section(out, "adam.m." + p.name, ckpt.optimizer->first_moment.at(k));
      detail::write_section(out, "adam.v." + p.name, ckpt.optimizer->second_moment.at(k));
      ++k;
    }
  }
  out << "end\n";
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError(CheckpointError::Kind::kIo, "cannot write " + path);
  save_checkpoint(ckpt, out);
  if (!out) throw CheckpointError(CheckpointError::Kind::kIo, "write to " + path + " failed");
}

namespace detail {

inline std::string read_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw CheckpointError(CheckpointError::Kind::kTruncated,
                          std::string("checkpoint ends before ") + what);
  }
  return line;
}

inline Tensor read_section(std::istream& in, const std::string& expected_name,
                           const Shape& expected_shape) {
  std::istringstream header(read_line(in, "a parameter section"));
  std::string keyword, name;
  std::size_t rank = 0;
  header >> keyword >> name >> rank;
  if (keyword != "section") {
    throw CheckpointError(CheckpointError::Kind::kTruncated,
                          "expected section " + expected_name + ", found '" + keyword + "'");
  }
  Shape shape(rank);
  for (auto& d : shape) header >> d;
  if (!header || name != expected_name || shape != expected_shape) {
    throw CheckpointError(CheckpointError::Kind::kShape,
                          "section " + name + " " + shape_string(shape) + " does not match " +
                              expected_name + " " + shape_string(expected_shape));
  }
  Tensor t(shape);
  for (double& v : t.data()) {
    char bytes[8];
    if (!in.read(bytes, 8)) {
      throw CheckpointError(CheckpointError::Kind::kTruncated, "section " + name + " is truncated");
    }
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes, 8);
    v = std::bit_cast<double>(to_little_endian(bits));
  }
  if (in.get() != '\n') {
    throw CheckpointError(CheckpointError::Kind::kTruncated, "section " + name + " is truncated");
  }
  return t;
}

}  // namespace detail

// Loads and validates a checkpoint. With `expected`, a checkpoint whose model
// shape disagrees with that configuration is refused.
inline Checkpoint load_checkpoint(std::istream& in, const ModelConfig* expected = nullptr) {
  using Kind = CheckpointError::Kind;
  {
    std::istringstream magic(detail::read_line(in, "the header"));
    std::string word;
    int version = 0;
    magic >> word >> version;
    if (word != kCheckpointMagic) throw CheckpointError(Kind::kVersion, "not a checkpoint file");
    if (version != kCheckpointVersion) {
      throw CheckpointError(Kind::kVersion,
                            "checkpoint format version " + std::to_string(version) +
                                " (this build reads " + std::to_string(kCheckpointVersion) + ")");
    }
  }
  std::istringstream sizes(detail::read_line(in, "the manifest"));
  std::string word;
  std::size_t bytes = 0;
  sizes >> word >> bytes;
  if (word != "manifest") throw CheckpointError(Kind::kManifest, "missing manifest header");
  std::string text(bytes, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(bytes)) || in.get() != '\n') {
    throw CheckpointError(Kind::kTruncated, "manifest is truncated");
  }
  nlohmann::json manifest = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (manifest.is_discarded() || !manifest.is_object() || !manifest.contains("format_version") ||
      manifest["format_version"] != kCheckpointVersion) {
    throw CheckpointError(Kind::kVersion, "manifest has no recognizable format version");
  }

  Checkpoint ckpt;
  try {
    ckpt.mode = parse_task_mode(manifest.at("mode").get<std::string>());
    const auto& pr = manifest.at("pruning");
    ckpt.pruning.enabled = pr.at("enabled").get<bool>();
    ckpt.pruning.k = pr.at("k").get<int>();
    ckpt.pruning.heads = parse_head_source(pr.at("heads").get<std::string>());
    ModelConfig config = manifest.at("config").get<ModelConfig>();
    if (expected) {
      if (auto key = detail::config_conflict(config, *expected)) {
        throw CheckpointError(Kind::kConfig, "checkpoint was trained with a different '" + *key +
                                                 "' than the requested configuration");
      }
    }
    Vocabulary vocab{StringIds(manifest.at("vocab").at("forms").get<std::vector<std::string>>()),
                     StringIds(manifest.at("vocab").at("lemmas").get<std::vector<std::string>>()),
                     StringIds(manifest.at("vocab").at("pos").get<std::vector<std::string>>())};
    PretrainedRows pretrained;
    pretrained.keys = StringIds(manifest.at("pretrained_keys").get<std::vector<std::string>>());
    pretrained.rows.assign(pretrained.keys.size(),
                           std::vector<double>(config.pretrained_dim, 0.0));
    SenseLexicon lexicon;
    lexicon.predicate_lemmas =
        manifest.at("lexicon").at("predicate_lemmas").get<std::set<std::string>>();
    lexicon.default_sense = manifest.at("lexicon").at("default_sense").get<std::string>();
    ckpt.model = std::make_unique<SrlModel>(config, std::move(vocab),
                                            detail::labels_from_json(manifest.at("labels")),
                                            std::move(lexicon), std::move(pretrained),
                                            manifest.at("seed").get<std::uint64_t>());
    ckpt.best_dev_f1 = manifest.at("best_dev_f1").get<double>();
    ckpt.step = manifest.at("step").get<std::uint64_t>();
    if (manifest.contains("optimizer")) {
      AdamState state(detail::adam_config_from_json(manifest["optimizer"].at("config")));
      state.step = manifest["optimizer"].at("step").get<std::uint64_t>();
      ckpt.optimizer = std::move(state);
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(Kind::kManifest, std::string("malformed manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(Kind::kManifest, std::string("malformed manifest: ") + e.what());
  }

  const auto& declared = manifest.at("parameters");
  ParameterStore& params = ckpt.model->params();
  if (declared.size() != params.size()) {
    throw CheckpointError(Kind::kShape, "manifest lists " + std::to_string(declared.size()) +
                                            " parameters, the configuration implies " +
                                            std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params[k];
    if (declared[k].at("name") != p.name || declared[k].at("shape").get<Shape>() != p.value.shape()) {
      throw CheckpointError(Kind::kShape, "manifest entry " + declared[k].dump() +
                                              " does not match parameter " + p.name + " " +
                                              shape_string(p.value.shape()));
    }
    p.value = detail::read_section(in, p.name, p.value.shape());
  }
  if (ckpt.optimizer && manifest["optimizer"].value("moments", false)) {
    for (const Parameter& p : params) {
      ckpt.optimizer->first_moment.push_back(
          detail::read_section(in, "adam.m." + p.name, p.value.shape()));
      ckpt.optimizer->second_moment.push_back(
          detail::read_section(in, "adam.v." + p.name, p.value.shape()));
    }
  }
  if (detail::read_line(in, "the end marker") != "end" || in.eof()) {
    throw CheckpointError(Kind::kTruncated, "missing end marker");
  }
  return ckpt;
}

inline Checkpoint load_checkpoint(const std::string& path, const ModelConfig* expected = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointError::Kind::kIo, "cannot open " + path);
  return load_checkpoint(in, expected);
}

}  // namespace srl
