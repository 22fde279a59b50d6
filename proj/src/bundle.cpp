#include "trimod/bundle.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "trimod/text.hpp"

namespace trimod {
namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || end != value.data() + value.size()) {
    throw ParseError("bad number for " + key + ": '" + value + "'");
  }
  return out;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || end != value.data() + value.size()) {
    throw ParseError("bad non-negative integer for " + key + ": '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ParseError("bad boolean for " + key + ": '" + value + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractError(what);
}

}  // namespace

void TrainConfig::validate() const {
  require(learning_rate >= 0.0, "learning_rate must be non-negative");
  require(lr_decay >= 0.0, "learning_rate_decay must be non-negative");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(accumulation_steps >= 1, "k_steps must be at least 1");
  require(dropout >= 0.0 && dropout < 1.0, "dropout_rate must be in [0, 1)");
  require(l1 >= 0.0, "l1 must be non-negative");
  require(l2 >= 0.0, "l2 must be non-negative");
}

void ModelDims::validate() const {
  require(word_dim > 0 && char_embed_dim > 0 && char_hidden > 0 && word_hidden > 0 &&
              fused_dim > 0 && visual_dim > 0,
          "model dimensions must be positive");
  require(segmenter.embed > 0 && segmenter.filters > 0 && segmenter.hidden > 0,
          "segmenter dimensions must be positive");
}

KeyValues parse_key_values(std::istream& in, const std::string& source) {
  KeyValues out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    auto key = std::string(trim(text.substr(0, eq)));
    auto value = std::string(trim(text.substr(eq + 1)));
    if (key.empty()) throw ParseError(source + ":" + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  return parse_key_values(in, path.string());
}

KeyValues to_key_values(const TrainConfig& c) {
  return {
      {"learning_rate", format_double(c.learning_rate)},
      {"learning_rate_decay", format_double(c.lr_decay)},
      {"batch_size", std::to_string(c.batch_size)},
      {"k_steps", std::to_string(c.accumulation_steps)},
      {"dropout_rate", format_double(c.dropout)},
      {"epochs", std::to_string(c.epochs)},
      {"seed", std::to_string(c.seed)},
      {"l1", format_double(c.l1)},
      {"l2", format_double(c.l2)},
      {"clip_norm", format_double(c.clip_norm)},
  };
}

KeyValues to_key_values(const ModelDims& d) {
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  return {
      {"word_embedding_dim", std::to_string(d.word_dim)},
      {"char_embedding_dim", std::to_string(d.char_embed_dim)},
      {"char_hidden_dim", std::to_string(d.char_hidden)},
      {"word_hidden_dim", std::to_string(d.word_hidden)},
      {"fused_dim", std::to_string(d.fused_dim)},
      {"visual_dim", std::to_string(d.visual_dim)},
      {"segmenter_embedding_dim", std::to_string(d.segmenter.embed)},
      {"segmenter_filters", std::to_string(d.segmenter.filters)},
      {"segmenter_hidden_dim", std::to_string(d.segmenter.hidden)},
      {"use_visual", flag(d.use_visual)},
      {"use_hashtags", flag(d.use_hashtags)},
      {"bio_constraints", flag(d.bio_constraints)},
  };
}

bool apply_key_value(TrainConfig& c, const std::string& key, const std::string& value) {
  if (key == "learning_rate") c.learning_rate = parse_double(key, value);
  else if (key == "learning_rate_decay") c.lr_decay = parse_double(key, value);
  else if (key == "batch_size") c.batch_size = parse_unsigned(key, value);
  else if (key == "k_steps") c.accumulation_steps = parse_unsigned(key, value);
  else if (key == "dropout_rate") c.dropout = parse_double(key, value);
  else if (key == "epochs") c.epochs = parse_unsigned(key, value);
  else if (key == "seed") c.seed = parse_unsigned(key, value);
  else if (key == "l1") c.l1 = parse_double(key, value);
  else if (key == "l2") c.l2 = parse_double(key, value);
  else if (key == "clip_norm") c.clip_norm = parse_double(key, value);
  else return false;
  return true;
}

bool apply_key_value(ModelDims& d, const std::string& key, const std::string& value) {
  if (key == "word_embedding_dim") d.word_dim = parse_unsigned(key, value);
  else if (key == "char_embedding_dim") d.char_embed_dim = parse_unsigned(key, value);
  else if (key == "char_hidden_dim") d.char_hidden = parse_unsigned(key, value);
  else if (key == "word_hidden_dim") d.word_hidden = parse_unsigned(key, value);
  else if (key == "fused_dim") d.fused_dim = parse_unsigned(key, value);
  else if (key == "visual_dim") d.visual_dim = parse_unsigned(key, value);
  else if (key == "segmenter_embedding_dim") d.segmenter.embed = parse_unsigned(key, value);
  else if (key == "segmenter_filters") d.segmenter.filters = parse_unsigned(key, value);
  else if (key == "segmenter_hidden_dim") d.segmenter.hidden = parse_unsigned(key, value);
  else if (key == "use_visual") d.use_visual = parse_bool(key, value);
  else if (key == "use_hashtags") d.use_hashtags = parse_bool(key, value);
  else if (key == "bio_constraints") d.bio_constraints = parse_bool(key, value);
  else return false;
  return true;
}

void apply_config(const KeyValues& entries, TrainConfig& config, ModelDims& dims,
                  const std::string& source) {
  for (const auto& [key, value] : entries) {
    if (!apply_key_value(config, key, value) && !apply_key_value(dims, key, value)) {
      throw ParseError(source + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace trimod
