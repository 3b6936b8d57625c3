// Copyright 2026 The mtriage Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mtriage/demo.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mtriage/common.hpp"
#include "mtriage/corpus.hpp"
#include "mtriage/random.hpp"
#include "mtriage/store.hpp"
#include "mtriage/utf8.hpp"

namespace mtriage {

namespace {

using nlohmann::ordered_json;

struct Template {
  std::string_view en;
  std::string_view es;
};

// Punctuation counts agree between the two sides of every template.
constexpr std::array<std::array<Template, 5>, 8> kFamiliar = {{
    {{{"Will it rain in {city} tomorrow?", "¿Lloverá en {city} mañana?"},
      {"The temperature today is {n} degrees.", "La temperatura hoy es de {n} grados."},
      {"It is very cold this morning, so wear a coat.", "Hace mucho frío esta mañana, así que ponte un abrigo."},
      {"What a beautiful sunny day!", "¡Qué día tan soleado y bonito!"},
      {"The storm closed the roads near {city}.", "La tormenta cerró las carreteras cerca de {city}."}}},
    {{{"How do I get to the train station?", "¿Cómo llego a la estación de tren?"},
      {"I booked a hotel in {city} for {n} nights.", "Reservé un hotel en {city} por {n} noches."},
      {"The flight was delayed, but we arrived safely.", "El vuelo se retrasó, pero llegamos bien."},
      {"Where is the nearest museum?", "¿Dónde está el museo más cercano?"},
      {"Have a great trip!", "¡Buen viaje!"}}},
    {{{"I would like a table for {n} people.", "Quisiera una mesa para {n} personas."},
      {"Is this dish very spicy?", "¿Este plato es muy picante?"},
      {"The soup is delicious!", "¡La sopa está deliciosa!"},
      {"We ordered rice, beans and chicken.", "Pedimos arroz, frijoles y pollo."},
      {"Can I pay with a card?", "¿Puedo pagar con tarjeta?"}}},
    {{{"How much does this shirt cost?", "¿Cuánto cuesta esta camisa?"},
      {"The store opens at {n} in the morning.", "La tienda abre a las {n} de la mañana."},
      {"I want to return these shoes.", "Quiero devolver estos zapatos."},
      {"This jacket is too expensive!", "¡Esta chaqueta es demasiado cara!"},
      {"Do you have this in a smaller size?", "¿Tiene esto en una talla más pequeña?"}}},
    {{{"The meeting starts at {n} o'clock.", "La reunión empieza a las {n}."},
      {"Send me the report by Friday.", "Envíame el informe antes del viernes."},
      {"Is the office closed on Monday?", "¿La oficina está cerrada el lunes?"},
      {"My manager approved the project.", "Mi jefe aprobó el proyecto."},
      {"We finished the project early!", "¡Terminamos el proyecto antes de tiempo!"}}},
    {{{"My sister lives in {city}.", "Mi hermana vive en {city}."},
      {"How old is your son?", "¿Cuántos años tiene tu hijo?"},
      {"Our grandmother turned {n} yesterday.", "Nuestra abuela cumplió {n} años ayer."},
      {"Happy birthday, Mom!", "¡Feliz cumpleaños, mamá!"},
      {"We visit our parents every Sunday.", "Visitamos a nuestros padres cada domingo."}}},
    {{{"Who won the match last night?", "¿Quién ganó el partido anoche?"},
      {"The team scored {n} goals.", "El equipo marcó {n} goles."},
      {"What an incredible game!", "¡Qué partido tan increíble!"},
      {"I run five kilometers every morning.", "Corro cinco kilómetros cada mañana."},
      {"The stadium in {city} is full.", "El estadio de {city} está lleno."}}},
    {{{"How do I reset my password?", "¿Cómo restablezco mi contraseña?"},
      {"My phone battery lasts {n} hours.", "La batería de mi teléfono dura {n} horas."},
      {"The new laptop is very fast.", "La nueva computadora portátil es muy rápida."},
      {"Download the app from the store.", "Descarga la aplicación desde la tienda."},
      {"This update is amazing!", "¡Esta actualización es increíble!"}}},
}};

constexpr std::array<Template, 7> kNicheFrames = {{
    {"My {x} stopped working after the update.", "Mi {x} dejó de funcionar después de la actualización."},
    {"Where can I find a good {x} near {city}?", "¿Dónde puedo encontrar {x} cerca de {city}?"},
    {"I really love my new {x}!", "¡Me encanta mi nuevo {x}!"},
    {"How much does a {x} cost in {city}?", "¿Cuánto cuesta {x} en {city}?"},
    {"Tell me more about {x}, please.", "Cuéntame más sobre {x}, por favor."},
    {"Is {x} safe for children?", "¿Es {x} seguro para los niños?"},
    {"I spent {n} hours reading about {x}.", "Pasé {n} horas leyendo sobre {x}."},
}};

constexpr std::array<Template, 115> kNiche = {{
    {"saxophone", "saxofón"},       {"telescope", "telescopio"},     {"volcano", "volcán"},
    {"kombucha", "kombucha"},       {"origami", "origami"},          {"blockchain", "blockchain"},
    {"insulin", "insulina"},        {"mortgage", "hipoteca"},        {"tarot", "tarot"},
    {"drone", "dron"},              {"sourdough", "masa madre"},     {"skateboard", "monopatín"},
    {"aquarium", "acuario"},        {"chess", "ajedrez"},            {"ukulele", "ukelele"},
    {"karaoke", "karaoke"},         {"pilates", "pilates"},          {"sushi", "sushi"},
    {"tattoo", "tatuaje"},          {"vinyl", "vinilo"},             {"podcast", "pódcast"},
    {"crossword", "crucigrama"},    {"beekeeping", "apicultura"},    {"calligraphy", "caligrafía"},
    {"falconry", "cetrería"},       {"snorkel", "esnórquel"},        {"kayak", "kayak"},
    {"trampoline", "trampolín"},    {"harmonica", "armónica"},       {"hammock", "hamaca"},
    {"terrarium", "terrario"},      {"bonsai", "bonsái"},            {"espresso", "café expreso"},
    {"quilting", "acolchado"},      {"pottery", "cerámica"},         {"astrology", "astrología"},
    {"cryptocurrency", "criptomoneda"}, {"metaverse", "metaverso"},  {"hologram", "holograma"},
    {"robotics", "robótica"},       {"submarine", "submarino"},      {"glacier", "glaciar"},
    {"tornado", "tornado"},         {"earthquake", "terremoto"},     {"asteroid", "asteroide"},
    {"microscope", "microscopio"},  {"vaccine", "vacuna"},           {"allergy", "alergia"},
    {"migraine", "migraña"},        {"dentist", "dentista"},         {"orthodontics", "ortodoncia"},
    {"physiotherapy", "fisioterapia"}, {"acupuncture", "acupuntura"}, {"chemotherapy", "quimioterapia"},
    {"dialysis", "diálisis"},       {"pacemaker", "marcapasos"},     {"wheelchair", "silla de ruedas"},
    {"prosthesis", "prótesis"},     {"lawsuit", "demanda"},          {"divorce", "divorcio"},
    {"inheritance", "herencia"},    {"visa", "visado"},              {"passport", "pasaporte"},
    {"customs", "aduana"},          {"tariff", "arancel"},           {"pension", "pensión"},
    {"lottery", "lotería"},         {"casino", "casino"},            {"poker", "póquer"},
    {"sudoku", "sudoku"},           {"anime", "anime"},              {"manga", "manga"},
    {"cosplay", "cosplay"},         {"esports", "deportes electrónicos"}, {"paintball", "paintball"},
    {"archery", "tiro con arco"},   {"fencing", "esgrima"},          {"rowing", "remo"},
    {"curling", "curling"},         {"lacrosse", "lacrosse"},        {"rugby", "rugby"},
    {"cricket", "críquet"},         {"bobsled", "bobsleigh"},        {"parachute", "paracaídas"},
    {"paragliding", "parapente"},   {"scuba", "buceo"},              {"surfboard", "tabla de surf"},
    {"snowboard", "snowboard"},     {"igloo", "iglú"},               {"lighthouse", "faro"},
    {"windmill", "molino"},         {"greenhouse", "invernadero"},   {"compost", "compost"},
    {"fertilizer", "fertilizante"}, {"pesticide", "pesticida"},      {"tractor", "tractor"},
    {"vineyard", "viñedo"},         {"brewery", "cervecería"},       {"bakery", "panadería"},
    {"locksmith", "cerrajero"},     {"plumber", "fontanero"},        {"chimney", "chimenea"},
    {"thermostat", "termostato"},   {"dehumidifier", "deshumidificador"}, {"turbine", "turbina"},
    {"satellite", "satélite"},      {"typewriter", "máquina de escribir"}, {"gramophone", "gramófono"},
    {"accordion", "acordeón"},      {"xylophone", "xilófono"},       {"trombone", "trombón"},
    {"cello", "violonchelo"},       {"banjo", "banjo"},              {"theremin", "theremín"},
    {"metronome", "metrónomo"},
}};

constexpr std::array<std::string_view, 10> kCities = {"Madrid", "Paris",  "London", "Tokyo",  "Boston",
                                                      "Lima",   "Rome",   "Berlin", "Chicago", "Sydney"};
constexpr std::array<std::string_view, 8> kEmoji = {"😀", "🎉", "👍", "😂", "🌞", "🍕", "⚽", "🚀"};
constexpr std::array<std::string_view, 7> kFillers = {"cosa", "bueno", "entonces", "algo", "tal", "pues", "así"};
constexpr std::array<std::string_view, 3> kTrainSources = {"news", "subtitles", "web"};
constexpr std::array<std::string_view, 3> kLogSources = {"app", "web-widget", "api"};

std::string replace_all(std::string text, std::string_view key, std::string_view value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

bool chance(std::mt19937_64& rng, double p) { return uniform_unit(rng) < p; }

template <typename T, std::size_t N>
const T& pick(std::mt19937_64& rng, const std::array<T, N>& items) {
  return items[uniform_index(rng, N)];
}

bool plain_word(std::string_view token) {
  if (token.empty()) return false;
  for (const char32_t cp : utf8::decode(token)) {
    if (!utf8::is_word_char(cp) || (cp >= U'0' && cp <= U'9')) return false;
  }
  return true;
}

// Word-level noise on the translation: swaps plain words for fillers or drops them.
std::string add_noise(std::mt19937_64& rng, std::string_view text, double rate) {
  std::string out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(' ', start), text.size());
    const auto token = text.substr(start, end - start);
    std::string word(token);
    if (plain_word(token) && chance(rng, rate)) word = chance(rng, 0.5) ? std::string(pick(rng, kFillers)) : "";
    if (!word.empty()) {
      if (!out.empty()) out += ' ';
      out += word;
    }
    start = end + 1;
  }
  return out;
}

void erase_first(std::string& text, std::string_view mark) {
  if (const auto pos = text.find(mark); pos != std::string::npos) text.erase(pos, mark.size());
}

struct Pair {
  std::string source, reference, translation;
};

Pair render(std::mt19937_64& rng, const Template& t, std::string_view niche_en, std::string_view niche_es,
            double noise_rate) {
  const std::string city(pick(rng, kCities));
  const int n = 2 + static_cast<int>(uniform_index(rng, 11));
  auto fill = [&](std::string_view tmpl, std::string_view niche, int number) {
    std::string s = replace_all(std::string(tmpl), "{city}", city);
    s = replace_all(std::move(s), "{n}", std::to_string(number));
    return replace_all(std::move(s), "{x}", niche);
  };
  Pair p;
  p.source = fill(t.en, niche_en, n);
  p.reference = fill(t.es, niche_es, n);
  const bool has_number = t.en.find("{n}") != std::string_view::npos;
  std::string core = fill(t.es, niche_es, has_number && chance(rng, 0.05) ? n + 1 : n);
  core = add_noise(rng, core, noise_rate);
  if (core.find(',') != std::string::npos && chance(rng, 0.3)) erase_first(core, ",");
  if (!core.empty() && core.back() == '.' && chance(rng, 0.06)) core.pop_back();
  if (chance(rng, 0.10)) erase_first(core, "¿");
  if (chance(rng, 0.10)) erase_first(core, "¡");
  p.translation = std::move(core);

  if (chance(rng, 0.06)) {
    const std::string e(pick(rng, kEmoji));
    p.source += " " + e;
    p.reference += " " + e;
    if (!chance(rng, 0.3)) p.translation += " " + e;
  }
  if (chance(rng, 0.04)) {
    const std::string slug = "page" + std::to_string(uniform_index(rng, 90) + 10);
    p.source += " More at https://www.example.com/" + slug + ".";
    p.reference += " Más en https://www.example.com/" + slug + ".";
    p.translation += " Más en https://www.example.com/" + slug + ".";
  }
  if (chance(rng, 0.03)) {
    const int amount = 1000 + static_cast<int>(uniform_index(rng, 9000));
    const std::string thousands = std::to_string(amount / 1000);
    const std::string rest = std::to_string(amount % 1000 + 1000).substr(1);
    p.source += " It costs " + thousands + "," + rest + " dollars.";
    p.reference += " Cuesta " + thousands + "." + rest + " dólares.";
    p.translation += " Cuesta " + thousands + "." + rest + " dólares.";
  }
  return p;
}

std::vector<float> random_direction(std::mt19937_64& rng, std::size_t dim, double length) {
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = standard_normal(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm * length);
  return out;
}

std::vector<float> embed(std::mt19937_64& rng, const std::vector<float>& centroid, const std::vector<float>& offset) {
  std::vector<float> v(centroid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = static_cast<float>(centroid[i] + offset[i] + 0.04 * standard_normal(rng));
  }
  return v;
}

}  // namespace

DemoFiles write_demo(const std::filesystem::path& dir, const DemoOptions& o) {
  if (o.unfamiliar_topics == 0 || o.unfamiliar_topics > kNiche.size()) {
    throw InputError("demo: unfamiliar_topics must be in [1, " + std::to_string(kNiche.size()) + "]");
  }
  if (o.n_train < 100 || o.n_log < 100 || o.dim < 2) throw InputError("demo: corpus too small");
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(derive_seed(o.seed, "demo"));
  const std::size_t K = o.unfamiliar_topics;

  // Embedding-space structure.
  std::vector<std::vector<float>> familiar_centroid, niche_centroid, familiar_offsets, frame_offsets;
  for (std::size_t d = 0; d < kFamiliar.size(); ++d) familiar_centroid.push_back(random_direction(rng, o.dim, 1.0));
  for (std::size_t k = 0; k < K; ++k) niche_centroid.push_back(random_direction(rng, o.dim, 1.0));
  for (std::size_t i = 0; i < kFamiliar.size() * 5; ++i) familiar_offsets.push_back(random_direction(rng, o.dim, 0.15));
  for (std::size_t i = 0; i < kNicheFrames.size(); ++i) frame_offsets.push_back(random_direction(rng, o.dim, 0.15));

  // 2D layout imitating a neighbour-preserving projection: everyday domains on
  // an inner ring, niche topics spread over outer rings.
  std::vector<Point2> familiar_center, niche_center;
  for (std::size_t d = 0; d < kFamiliar.size(); ++d) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(d) / static_cast<double>(kFamiliar.size());
    familiar_center.push_back({10.0 * std::cos(a), 10.0 * std::sin(a)});
  }
  for (double r = 18.0; niche_center.size() < K; r += 6.0) {
    const auto slots = static_cast<std::size_t>(2.0 * std::numbers::pi * r / 6.0);
    const double phase = r / 7.0;
    for (std::size_t s = 0; s < slots && niche_center.size() < K; ++s) {
      const double a = phase + 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(slots);
      niche_center.push_back({r * std::cos(a), r * std::sin(a)});
    }
  }
  std::vector<Timestamp> niche_start;
  const Timestamp epoch = *parse_rfc3339("2024-01-01T00:00:00Z");
  for (std::size_t k = 0; k < K; ++k) {
    niche_start.push_back(epoch + std::chrono::days(static_cast<int>(uniform_index(rng, 150))));
  }

  std::vector<EmbeddingEntry> embeddings;
  std::string train_text, log_text, coords_text;

  auto emit = [&](const std::string& id, bool train, const Pair& p, std::string_view provenance,
                  std::optional<Timestamp> ts, std::vector<float> vec, Point2 xy) {
    ordered_json j;
    j["id"] = id;
    j["source"] = p.source;
    j["translation"] = p.translation;
    if (train) j["reference"] = p.reference;
    if (ts) j["timestamp"] = format_rfc3339(*ts);
    j["provenance"] = provenance;
    (train ? train_text : log_text) += j.dump() + "\n";
    embeddings.push_back({id, std::move(vec)});
    coords_text += ordered_json({{"id", id}, {"x", xy.x}, {"y", xy.y}}).dump() + "\n";
  };
  auto jitter = [&](Point2 c, double sd) {
    return Point2{c.x + sd * standard_normal(rng), c.y + sd * standard_normal(rng)};
  };
  auto familiar_record = [&](const std::string& id, bool train, double noise, std::string_view provenance,
                             std::optional<Timestamp> ts, std::optional<Point2> fixed_xy) {
    const std::size_t d = uniform_index(rng, kFamiliar.size());
    const std::size_t t = uniform_index(rng, 5);
    const Pair p = render(rng, kFamiliar[d][t], "", "", noise);
    auto vec = embed(rng, familiar_centroid[d], familiar_offsets[d * 5 + t]);
    const double a = 2.0 * std::numbers::pi * static_cast<double>(t) / 5.0;
    const Point2 sub{familiar_center[d].x + 0.8 * std::cos(a), familiar_center[d].y + 0.8 * std::sin(a)};
    emit(id, train, p, provenance, ts, std::move(vec), fixed_xy ? *fixed_xy : jitter(sub, 1.0));
  };
  auto niche_record = [&](const std::string& id, bool train, std::size_t k, double noise, std::string_view provenance,
                          std::optional<Timestamp> ts, double spread) {
    const std::size_t f = uniform_index(rng, kNicheFrames.size());
    const Pair p = render(rng, kNicheFrames[f], kNiche[k].en, kNiche[k].es, noise);
    auto vec = embed(rng, niche_centroid[k], frame_offsets[f]);
    emit(id, train, p, provenance, ts, std::move(vec), jitter(niche_center[k], spread));
  };
  char id[32];

  const std::size_t niche_train = std::min(o.n_train / 2, std::max<std::size_t>(o.n_train / 25, 3 * K));
  const std::size_t step = std::max<std::size_t>(1, o.n_train / niche_train);
  for (std::size_t i = 0; i < o.n_train; ++i) {
    std::snprintf(id, sizeof id, "t%05zu", i + 1);
    const std::string_view provenance = pick(rng, kTrainSources);
    if (i % step == 0 && i / step < niche_train) {
      const std::size_t k = (i / step) % K;
      niche_record(id, true, k, 0.2 + 0.4 * uniform_unit(rng), provenance, std::nullopt, 0.9);
    } else {
      familiar_record(id, true, 0.25 * uniform_unit(rng), provenance, std::nullopt, std::nullopt);
    }
  }

  const double span_seconds = 180.0 * 86400.0;
  for (std::size_t i = 0; i < o.n_log; ++i) {
    std::snprintf(id, sizeof id, "l%05zu", i + 1);
    const std::string_view provenance = pick(rng, kLogSources);
    const double u = uniform_unit(rng);
    if (u < 0.42) {
      const std::size_t k = uniform_index(rng, K);
      const auto ts = niche_start[k] + std::chrono::milliseconds(
                                           static_cast<std::int64_t>(uniform_unit(rng) * 30.0 * 86400.0) * 1000);
      niche_record(id, false, k, 0.1 + 0.3 * uniform_unit(rng), provenance, ts, 0.6);
    } else {
      const auto ts = epoch + std::chrono::milliseconds(static_cast<std::int64_t>(uniform_unit(rng) * span_seconds) * 1000);
      std::optional<Point2> scatter;
      // A few scattered points that belong to no dense region.
      if (u > 0.97) scatter = Point2{-40.0 + 80.0 * uniform_unit(rng), -40.0 + 80.0 * uniform_unit(rng)};
      familiar_record(id, false, 0.25 * uniform_unit(rng), provenance, ts, scatter);
    }
  }
  // Blank requests are dropped at ingest.
  for (int i = 1; i <= 3; ++i) {
    std::snprintf(id, sizeof id, "l-blank-%d", i);
    ordered_json j{{"id", id}, {"source", "  "}, {"translation", ""}, {"timestamp", format_rfc3339(epoch)},
                   {"provenance", "app"}};
    log_text += j.dump() + "\n";
  }

  DemoFiles files{dir / "train.jsonl", dir / "log.jsonl", dir / "embeddings.aemb", dir / "coords.jsonl",
                  dir / "config.json"};
  write_text_file(files.train_file, train_text);
  write_text_file(files.log_file, log_text);
  write_text_file(files.coords_file, coords_text);
  write_embeddings_binary(files.embedding_file, embeddings);

  ordered_json config;
  config["train_file"] = "train.jsonl";
  config["log_file"] = "log.jsonl";
  config["embedding_file"] = "embeddings.aemb";
  config["coords_file"] = "coords.jsonl";
  config["store_dir"] = "store";
  config["language_pair"] = "en-es";
  config["rng_seed"] = o.seed;
  config["kde"] = {{"grid_density", 200}, {"acceleration", "tree"}, {"relative_tolerance", 1e-6}};
  config["topics"] = {{"sample_size", o.n_log * 45 / 100}, {"top_k_topics", 100}, {"min_cluster_size", 25}};
  config["expansion"] = {{"seeds_per_topic", 15}, {"radius", 0.6}};
  write_text_file(files.config_file, config.dump(2) + "\n");
  return files;
}

}  // namespace mtriage
