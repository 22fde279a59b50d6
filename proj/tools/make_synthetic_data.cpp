// Writes the bundled synthetic corpora into a directory:
//
//   memorize.txt, memorize_visual.txt    50 annotated posts with hashtags and images
//   signal_train.txt, signal_dev.txt     entity type decidable only from image/hashtag
//   signal_visual.txt
//   words200.txt                         dictionary for hashtag segmentation

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "trimod/corpus.hpp"
#include "trimod/text.hpp"

namespace {

using namespace trimod;

constexpr std::size_t kVisualDim = 16;

struct Entity {
  std::vector<std::string> tokens;
  EntityType type;
};

const std::vector<Entity>& entities() {
  static const std::vector<Entity> list = {
      {{"Alice"}, EntityType::PER},     {{"Bruno"}, EntityType::PER},
      {{"Chen", "Wei"}, EntityType::PER}, {{"Farah"}, EntityType::PER},
      {{"Gustavo"}, EntityType::PER},   {{"Hana"}, EntityType::PER},
      {{"Paris"}, EntityType::LOC},     {{"Toronto"}, EntityType::LOC},
      {{"Lagos"}, EntityType::LOC},     {{"Kyoto"}, EntityType::LOC},
      {{"New", "York"}, EntityType::LOC}, {{"Oslo"}, EntityType::LOC},
      {{"Arsenal"}, EntityType::ORG},   {{"UNICEF"}, EntityType::ORG},
      {{"Maple", "Leafs"}, EntityType::ORG}, {{"Toyota"}, EntityType::ORG},
      {{"Red", "Cross"}, EntityType::ORG}, {{"NASA"}, EntityType::ORG},
      {{"German", "Shepherd"}, EntityType::MISC}, {{"Olympics"}, EntityType::MISC},
      {{"iPhone"}, EntityType::MISC},   {{"Ramadan"}, EntityType::MISC},
      {{"Oscars"}, EntityType::MISC},   {{"Euro", "Cup"}, EntityType::MISC},
  };
  return list;
}

// '{}' marks an entity slot.
const std::vector<std::string>& memorize_templates() {
  static const std::vector<std::string> list = {
      "{} flew to {} today",
      "so proud of {} tonight",
      "{} fans celebrate in {}",
      "watching the {} with {} at home",
      "{} signs a deal with {}",
      "rainy morning in {} again",
      "{} and {} share the stage",
      "cannot wait for the {} this weekend",
      "big news from {} about {}",
      "{} posted a photo from {}",
  };
  return list;
}

const std::vector<std::string>& hashtags() {
  static const std::vector<std::string> list = {"#TonightGame", "#PlayingWithDog", "#SummerVibes",
                                                "#GoTeam", "#CityLights", "#BreakingNews"};
  return list;
}

Tensor random_vector(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> dist(0.0, scale);
  Tensor t({kVisualDim});
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

void write_visual(const std::filesystem::path& path,
                  const std::vector<std::pair<std::string, Tensor>>& rows) {
  std::ofstream out(path);
  out << "dim " << kVisualDim << "\n";
  char buf[32];
  for (const auto& [id, v] : rows) {
    out << id;
    for (double x : v.values()) {
      std::snprintf(buf, sizeof buf, " %.6f", x);
      out << buf;
    }
    out << "\n";
  }
}

void write_posts(const std::filesystem::path& path, const std::vector<Post>& posts) {
  std::ofstream out(path);
  write_corpus(out, posts);
}

void append_entity(Post& post, const Entity& e) {
  for (std::size_t i = 0; i < e.tokens.size(); ++i) {
    post.tokens.push_back(e.tokens[i]);
    post.tags.push_back(i == 0 ? begin_tag(e.type) : inside_tag(e.type));
  }
}

void append_word(Post& post, std::string_view w) {
  post.tokens.emplace_back(w);
  post.tags.push_back(Tag::O);
}

void make_memorize(const std::filesystem::path& dir, std::mt19937_64& rng) {
  std::vector<Post> posts;
  std::vector<std::pair<std::string, Tensor>> visual;
  std::uniform_int_distribution<std::size_t> pick_entity(0, entities().size() - 1);
  std::uniform_int_distribution<std::size_t> pick_template(0, memorize_templates().size() - 1);
  std::uniform_int_distribution<std::size_t> pick_tag(0, hashtags().size() - 1);
  for (std::size_t n = 0; n < 50; ++n) {
    Post post;
    for (auto w : split_whitespace(memorize_templates()[pick_template(rng)])) {
      if (w == "{}") {
        append_entity(post, entities()[pick_entity(rng)]);
      } else {
        append_word(post, w);
      }
    }
    if (n % 3 != 2) append_word(post, hashtags()[pick_tag(rng)]);
    post.hashtags = extract_hashtags(post.tokens);
    const auto id = "mem" + std::to_string(n);
    post.image_id = id;
    visual.emplace_back(id, random_vector(rng, 1.0));
    posts.push_back(std::move(post));
  }
  write_posts(dir / "memorize.txt", posts);
  write_visual(dir / "memorize_visual.txt", visual);
}

// Every post reads the same regardless of the entity's type, hashtags
// included; only the image vector reveals it.
void make_signal(const std::filesystem::path& dir, std::mt19937_64& rng) {
  const std::vector<std::string> names = {"Zorbex", "Quillon", "Marvane", "Telsor",
                                          "Brakk", "Ostrin", "Vellum", "Kasimo"};
  const std::vector<std::string> templates = {"look at {} today", "{} is here again",
                                              "we saw {} last night", "this is {} right now"};
  std::array<Tensor, kNumEntityTypes> prototypes;
  for (auto& p : prototypes) p = random_vector(rng, 1.0);

  std::uniform_int_distribution<std::size_t> pick_name(0, names.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_template(0, templates.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_type(0, kNumEntityTypes - 1);
  std::uniform_int_distribution<std::size_t> pick_tag(0, hashtags().size() - 1);
  std::vector<std::pair<std::string, Tensor>> visual;
  auto make = [&](std::size_t count, const std::string& prefix) {
    std::vector<Post> posts;
    for (std::size_t n = 0; n < count; ++n) {
      const auto type = kEntityTypes[pick_type(rng)];
      Post post;
      for (auto w : split_whitespace(templates[pick_template(rng)])) {
        if (w == "{}") {
          append_entity(post, {{names[pick_name(rng)]}, type});
        } else {
          append_word(post, w);
        }
      }
      append_word(post, hashtags()[pick_tag(rng)]);
      post.hashtags = extract_hashtags(post.tokens);
      const auto id = prefix + std::to_string(n);
      post.image_id = id;
      auto v = prototypes[index_of(type)];
      const auto noise = random_vector(rng, 0.1);
      for (std::size_t i = 0; i < kVisualDim; ++i) v[i] += noise[i];
      visual.emplace_back(id, std::move(v));
      posts.push_back(std::move(post));
    }
    return posts;
  };
  write_posts(dir / "signal_train.txt", make(120, "sigtr"));
  write_posts(dir / "signal_dev.txt", make(60, "sigdev"));
  write_visual(dir / "signal_visual.txt", visual);
}

void make_words(const std::filesystem::path& dir) {
  static const char* const words =
      "about animal answer apple area around arrive autumn baby back bake ball "
      "banana basket beach bear beauty bed before begin bell best better "
      "bike bird black blue boat body bone book bottle box bread bridge bright brother "
      "brown build butter cake camera candle captain car card carry castle cat chair "
      "change cheese chicken child church circle city class clean clock cloud coffee cold "
      "color corner cotton country cousin cream dance dark daughter desert dinner doctor "
      "dog dollar door dream dress drink drive duck early earth east egg engine evening "
      "family farm father field finger fire fish flag floor flower fly forest fork friend "
      "frog fruit game garden ghost gift girl glass gold grass green guitar hair hammer "
      "happy harbor heart helmet hill holiday honey horse hotel house island jacket jungle "
      "kettle king kitchen knife ladder lake lamp lemon letter light lion market milk "
      "monkey moon morning mother mountain music night ocean orange paper party pencil "
      "piano picture pillow planet playing pocket queen rabbit rain river road rocket "
      "salt school shadow sheep ship shoe silver sister sky snow soup spring star summer "
      "sun table teacher tiger tomato train tree truck umbrella valley village water "
      "whale window winter with wolf yellow zebra";
  std::ofstream out(dir / "words200.txt");
  for (auto w : split_whitespace(words)) out << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_synthetic_data <output-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(20240611);
  make_memorize(dir, rng);
  make_signal(dir, rng);
  make_words(dir);
  return 0;
}
