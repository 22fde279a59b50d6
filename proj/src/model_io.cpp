#include "trimod/model_io.hpp"

#include <spdlog/spdlog.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "trimod/text.hpp"

namespace trimod {
namespace {

constexpr std::string_view kMagic = "TRIMOD1\n";

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s, const std::string& where) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) throw FormatError(where + ": dangling escape");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 't': out += '\t'; break;
      default: throw FormatError(where + ": unknown escape");
    }
  }
  return out;
}

void write_vocab(std::ostream& out, std::string_view name, const std::vector<std::string>& v) {
  out << "section " << name << ' ' << v.size() << '\n';
  for (const auto& e : v) out << escape(e) << '\n';
}

void write_key_values(std::ostream& out, std::string_view name, const KeyValues& kv) {
  out << "section " << name << ' ' << kv.size() << '\n';
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

void put_f32(std::ostream& out, double value) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
  const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                         static_cast<char>((bits >> 16) & 0xff),
                         static_cast<char>((bits >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::size_t parse_count(std::string_view text, const std::string& where) {
  std::size_t out = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw FormatError(where + ": bad count '" + std::string(text) + "'");
  }
  return out;
}

class HeaderReader {
 public:
  HeaderReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) throw FormatError(source_ + ": unexpected end of header");
    ++line_;
    return line;
  }
  std::string where() const { return source_ + ": header line " + std::to_string(line_); }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 1;
};

struct ManifestEntry {
  std::string name;
  Shape shape;
};

}  // namespace

void save_bundle(const ModelBundle& bundle, std::ostream& out) {
  out << kMagic;
  out << "version " << bundle.version << '\n';
  write_vocab(out, "vocab.word", bundle.word_vocab);
  write_vocab(out, "vocab.char", bundle.char_vocab);
  write_vocab(out, "vocab.seg", bundle.segmenter_vocab);
  auto model = to_key_values(bundle.dims);
  model.emplace_back("epochs_trained", std::to_string(bundle.epochs_trained));
  write_key_values(out, "model", model);
  write_key_values(out, "config", to_key_values(bundle.config));
  out << "section tensors " << bundle.params.size() << '\n';
  for (const auto& [name, p] : bundle.params) {
    out << escape(name) << ' ' << p.value.rank();
    for (auto d : p.value.shape()) out << ' ' << d;
    out << '\n';
  }
  out << "end\n";
  for (const auto& [name, p] : bundle.params) {
    for (double v : p.value.values()) put_f32(out, v);
  }
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  std::ostringstream buffer;
  save_bundle(bundle, buffer);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const auto bytes = buffer.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw std::runtime_error("failed writing model to " + path.string());
}

ModelBundle load_bundle(std::istream& in, const std::string& source) {
  char magic[kMagic.size()];
  if (!in.read(magic, static_cast<std::streamsize>(kMagic.size())) ||
      std::string_view(magic, kMagic.size()) != kMagic) {
    throw FormatError(source + ": unsupported model format version (bad magic)");
  }
  HeaderReader header(in, source);
  ModelBundle bundle;
  {
    const auto line = header.next();
    const auto parts = split_whitespace(line);
    if (parts.size() != 2 || parts[0] != "version") {
      throw FormatError(header.where() + ": expected 'version <n>'");
    }
    const auto version = parse_count(parts[1], header.where());
    if (version != ModelBundle::kFormatVersion) {
      throw FormatError(source + ": unsupported model format version " + std::to_string(version));
    }
  }

  std::vector<ManifestEntry> manifest;
  bool saw_tensors = false;
  for (;;) {
    const auto line = header.next();
    if (line == "end") break;
    const auto parts = split_whitespace(line);
    if (parts.size() != 3 || parts[0] != "section") {
      throw FormatError(header.where() + ": expected 'section <name> <count>' or 'end'");
    }
    const std::string section(parts[1]);
    const auto count = parse_count(parts[2], header.where());
    std::vector<std::string> lines;
    lines.reserve(count);
    for (std::size_t i = 0; i < count; ++i) lines.push_back(header.next());

    if (section == "vocab.word" || section == "vocab.char" || section == "vocab.seg") {
      auto& vocab = section == "vocab.word"   ? bundle.word_vocab
                    : section == "vocab.char" ? bundle.char_vocab
                                              : bundle.segmenter_vocab;
      for (const auto& l : lines) vocab.push_back(unescape(l, header.where()));
    } else if (section == "model" || section == "config") {
      std::istringstream text;
      std::string joined;
      for (const auto& l : lines) joined += l + "\n";
      text.str(joined);
      for (const auto& [key, value] : parse_key_values(text, source + " [" + section + "]")) {
        bool known = false;
        try {
          if (section == "model") {
            if (key == "epochs_trained") {
              bundle.epochs_trained = parse_count(value, source);
              known = true;
            } else {
              known = apply_key_value(bundle.dims, key, value);
            }
          } else {
            known = apply_key_value(bundle.config, key, value);
          }
        } catch (const ParseError& e) {
          throw FormatError(source + ": " + e.what());
        }
        if (!known) spdlog::warn("{}: ignoring unknown {} key '{}'", source, section, key);
      }
    } else if (section == "tensors") {
      saw_tensors = true;
      for (const auto& l : lines) {
        const auto parts = split_whitespace(l);
        if (parts.size() < 2) throw FormatError(header.where() + ": bad tensor entry");
        ManifestEntry entry{unescape(parts[0], header.where()), {}};
        const auto rank = parse_count(parts[1], header.where());
        if (parts.size() != 2 + rank) {
          throw FormatError(source + ": tensor '" + entry.name + "' declares rank " +
                            std::to_string(rank) + " but lists " +
                            std::to_string(parts.size() - 2) + " dimensions");
        }
        for (std::size_t d = 0; d < rank; ++d) {
          entry.shape.push_back(parse_count(parts[2 + d], header.where()));
        }
        manifest.push_back(std::move(entry));
      }
    } else {
      spdlog::warn("{}: ignoring unknown section '{}'", source, section);
    }
  }
  if (!saw_tensors) throw FormatError(source + ": missing tensor manifest");

  for (const auto& entry : manifest) {
    const std::size_t n = shape_size(entry.shape);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      unsigned char bytes[4];
      if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw FormatError(source + ": unexpected end of payload in tensor '" + entry.name + "'");
      }
      const std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                                 (static_cast<std::uint32_t>(bytes[1]) << 8) |
                                 (static_cast<std::uint32_t>(bytes[2]) << 16) |
                                 (static_cast<std::uint32_t>(bytes[3]) << 24);
      values[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    try {
      bundle.params.add(entry.name, Tensor(entry.shape, std::move(values)));
    } catch (const std::logic_error& e) {
      throw FormatError(source + ": " + e.what());
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(source + ": payload is longer than the tensor manifest declares");
  }
  return bundle;
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file " + path.string());
  return load_bundle(in, path.string());
}

}  // namespace trimod
