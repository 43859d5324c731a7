// Copyright 2026 The EBR Authors.
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

#include "ebr/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "ebr/curation.hpp"
#include "ebr/error.hpp"
#include "ebr/random.hpp"
#include "ebr/text.hpp"

namespace ebr::synthetic {
namespace {

struct SpecKey {
  const char* key;
  std::vector<const char*> values;
};

struct Leaf {
  const char* name;  // category path leaf, e.g. "OLED TVs"
  const char* noun;  // title noun, e.g. "OLED TV"
};

struct CategoryTemplate {
  const char* top;
  const char* middle;
  double share;  // relative catalog share
  std::vector<Leaf> leaves;
  std::vector<const char*> brands;
  std::vector<const char*> adjectives;
  std::vector<SpecKey> specs;
  std::vector<const char*> features;
  std::vector<const char*> uses;
};

const std::vector<CategoryTemplate>& Templates() {
  static const std::vector<CategoryTemplate> kTemplates = {
      {"TV & Home Theater", "TVs", 1.6,
       {{"OLED TVs", "OLED TV"}, {"QLED TVs", "QLED TV"}, {"LED TVs", "LED TV"}},
       {"Sony", "LG", "Samsung", "TCL", "Hisense", "Vizio"},
       {"Smart", "4K UHD", "HDR", "Class"},
       {{"screen_size", {"43 in", "55 in", "65 in", "77 in", "85 in"}},
        {"resolution", {"4k", "8k", "1080p"}},
        {"refresh_rate", {"60hz", "120hz", "144hz"}}},
       {"dolby vision", "a bright panel", "low input lag", "built-in streaming apps", "voice remote"},
       {"movie nights", "sports fans", "console gaming", "bright living rooms"}},
      {"Audio", "Headphones", 1.3,
       {{"Wireless Headphones", "Wireless Headphones"},
        {"Earbuds", "Earbuds"},
        {"Noise Cancelling Headphones", "Noise Cancelling Headphones"}},
       {"Sony", "Bose", "JBL", "Sennheiser", "Beats", "Skullcandy"},
       {"Bluetooth", "Over-Ear", "True Wireless", "Sport"},
       {{"color", {"black", "white", "silver", "blue", "midnight"}},
        {"battery_life", {"20 hours", "30 hours", "40 hours"}}},
       {"active noise cancellation", "deep bass", "a built-in microphone", "multipoint pairing", "fast charging"},
       {"commuting", "workouts", "travel", "office calls"}},
      {"Computers & Tablets", "Laptops", 1.4,
       {{"Gaming Laptops", "Gaming Laptop"}, {"2-in-1 Laptops", "2-in-1 Laptop"}, {"Chromebooks", "Chromebook"}},
       {"HP", "Dell", "Lenovo", "ASUS", "Acer", "MSI"},
       {"Touch-Screen", "Thin", "Performance", "Everyday"},
       {{"ram", {"8gb", "16gb", "32gb"}},
        {"storage", {"256gb ssd", "512gb ssd", "1tb ssd"}},
        {"screen_size", {"13.3 in", "14 in", "15.6 in", "17.3 in"}}},
       {"a fast processor", "a backlit keyboard", "long battery life", "a dedicated graphics card", "wi-fi 6"},
       {"students", "remote work", "content creation", "gaming on the go"}},
      {"Cell Phones", "Smartphones", 1.2,
       {{"Unlocked Phones", "Unlocked Smartphone"}, {"Prepaid Phones", "Prepaid Phone"}, {"Phone Cases", "Phone Case"}},
       {"Apple", "Samsung", "Google", "Motorola", "OnePlus", "OtterBox"},
       {"5G", "Rugged", "Slim", "Pro"},
       {{"storage", {"128gb", "256gb", "512gb"}}, {"color", {"black", "graphite", "green", "blue", "purple"}}},
       {"a triple camera", "all-day battery", "wireless charging", "drop protection", "a bright oled display"},
       {"photography", "everyday use", "outdoor adventures", "business travel"}},
      {"Appliances", "Refrigerators", 1.0,
       {{"French Door Refrigerators", "French Door Refrigerator"},
        {"Side-by-Side Refrigerators", "Side-by-Side Refrigerator"},
        {"Mini Fridges", "Mini Fridge"}},
       {"LG", "Samsung", "Whirlpool", "GE", "Frigidaire", "Insignia"},
       {"Counter-Depth", "Energy Star", "Smart", "Compact"},
       {{"capacity", {"3.1 cu ft", "22 cu ft", "25 cu ft", "28 cu ft"}},
        {"finish", {"stainless steel", "black stainless", "white"}}},
       {"an ice maker", "a water dispenser", "adjustable shelves", "fingerprint resistant doors", "door-in-door storage"},
       {"large families", "dorm rooms", "kitchen remodels", "garages"}},
      {"Cameras", "Digital Cameras", 0.8,
       {{"Mirrorless Cameras", "Mirrorless Camera"}, {"DSLR Cameras", "DSLR Camera"}, {"Action Cameras", "Action Camera"}},
       {"Canon", "Nikon", "Sony", "Fujifilm", "GoPro", "Panasonic"},
       {"Full-Frame", "Compact", "Waterproof", "Vlogging"},
       {{"megapixels", {"20mp", "24mp", "33mp", "45mp"}}, {"video", {"4k video", "5.3k video", "8k video"}}},
       {"image stabilization", "fast autofocus", "a flip screen", "weather sealing", "dual card slots"},
       {"travel photography", "vlogging", "wildlife", "action sports"}},
      {"Video Games", "Gaming", 1.1,
       {{"Gaming Consoles", "Console"}, {"Controllers", "Controller"}, {"Gaming Headsets", "Gaming Headset"}},
       {"Sony", "Microsoft", "Nintendo", "Razer", "Logitech", "Turtle Beach"},
       {"Wireless", "Pro", "Limited Edition", "RGB"},
       {{"platform", {"playstation 5", "xbox series x", "nintendo switch", "pc"}},
        {"color", {"black", "white", "red", "camo"}}},
       {"haptic feedback", "low latency", "surround sound", "remappable buttons", "a detachable microphone"},
       {"competitive play", "family game night", "streaming", "couch co-op"}},
      {"Smart Home", "Security", 0.8,
       {{"Video Doorbells", "Video Doorbell"}, {"Security Cameras", "Security Camera"}, {"Smart Locks", "Smart Lock"}},
       {"Ring", "Arlo", "Google", "Eufy", "August", "Wyze"},
       {"Wi-Fi", "Battery Powered", "Outdoor", "Wired"},
       {{"resolution", {"1080p", "2k", "4k"}}, {"power", {"battery", "wired", "solar"}}},
       {"night vision", "two-way talk", "motion alerts", "a keypad", "cloud storage"},
       {"front porches", "apartments", "backyards", "package protection"}},
      {"Wearables", "Smartwatches", 0.7,
       {{"Smartwatches", "Smartwatch"}, {"Fitness Trackers", "Fitness Tracker"}},
       {"Apple", "Samsung", "Garmin", "Fitbit", "Amazfit"},
       {"GPS", "LTE", "Slim", "Rugged"},
       {{"case_size", {"40mm", "41mm", "44mm", "45mm"}}, {"band", {"sport band", "leather band", "silicone band"}}},
       {"heart rate tracking", "sleep tracking", "an always-on display", "built-in gps", "contactless payments"},
       {"runners", "swimmers", "everyday wellness", "hiking"}},
      {"Car Electronics", "Car Audio", 0.6,
       {{"Car Stereos", "Car Stereo"}, {"Dash Cams", "Dash Cam"}, {"Car Speakers", "Car Speaker"}},
       {"Pioneer", "Kenwood", "Garmin", "JVC", "Rockford Fosgate"},
       {"Bluetooth", "Double-DIN", "Front and Rear", "Coaxial"},
       {{"screen_size", {"6.8 in", "7 in", "9 in"}}, {"feature", {"apple carplay", "android auto", "gps"}}},
       {"a touchscreen", "loop recording", "parking mode", "hands-free calling", "crisp highs"},
       {"road trips", "rideshare drivers", "daily commutes", "older vehicles"}},
      {"Office", "Printers", 0.6,
       {{"Inkjet Printers", "Inkjet Printer"}, {"Laser Printers", "Laser Printer"}, {"Ink & Toner", "Ink Cartridge"}},
       {"HP", "Canon", "Epson", "Brother"},
       {"All-in-One", "Wireless", "Monochrome", "High-Yield"},
       {{"color_mode", {"color", "black and white"}}, {"pages_per_minute", {"15 ppm", "22 ppm", "40 ppm"}}},
       {"automatic duplex printing", "mobile printing", "a large paper tray", "low cost per page", "scanning"},
       {"home offices", "small businesses", "school projects", "photo printing"}},
      {"Kitchen", "Small Appliances", 0.9,
       {{"Coffee Makers", "Coffee Maker"}, {"Air Fryers", "Air Fryer"}, {"Blenders", "Blender"}},
       {"Ninja", "Keurig", "Cuisinart", "Instant", "Breville", "KitchenAid"},
       {"Programmable", "Digital", "Stainless Steel", "Compact"},
       {{"capacity", {"12 cup", "5.5 qt", "64 oz", "8 qt"}}, {"color", {"black", "silver", "red", "white"}}},
       {"one-touch presets", "a dishwasher-safe basket", "a removable reservoir", "a powerful motor", "a keep-warm mode"},
       {"busy mornings", "healthy meals", "meal prep", "small kitchens"}},
  };
  return kTemplates;
}

template <typename T>
const T& Pick(const std::vector<T>& items, Rng& rng) {
  return items[UniformIndex(rng, items.size())];
}

std::string ModelCode(const std::string& brand, Rng& rng) {
  std::string prefix;
  for (char c : brand) {
    if (std::isalpha(static_cast<unsigned char>(c)) && prefix.size() < 2) {
      prefix.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%03u%c", prefix.c_str(),
                static_cast<unsigned>(UniformIndex(rng, 1000)),
                static_cast<char>('A' + UniformIndex(rng, 26)));
  return buf;
}

corpus::Signal DrawSignal(Rng& rng) {
  const double u = UniformUnit(rng);
  if (u < 0.55) return corpus::Signal::kPdpView;
  if (u < 0.70) return corpus::Signal::kPlpAtc;
  if (u < 0.80) return corpus::Signal::kPlpCheckAvailability;
  if (u < 0.93) return corpus::Signal::kPdpAtc;
  return corpus::Signal::kPdpCheckAvailability;
}

}  // namespace

SyntheticCorpus GenerateCorpus(const CorpusSpec& spec) {
  if (spec.products < 1 || spec.visitors < 1) {
    throw Error(ErrorCode::kInvalidConfig, "corpus needs at least one product and visitor");
  }
  const auto& templates = Templates();
  Rng rng(SplitMix64(spec.seed));

  double share_total = 0.0;
  for (const auto& t : templates) share_total += t.share;

  std::vector<corpus::ProductRecord> products;
  std::set<std::string> codes;
  for (std::size_t i = 0; i < spec.products; ++i) {
    double u = UniformUnit(rng) * share_total;
    std::size_t c = 0;
    while (c + 1 < templates.size() && u >= templates[c].share) u -= templates[c++].share;
    const CategoryTemplate& t = templates[c];
    const Leaf& leaf = Pick(t.leaves, rng);
    const std::string brand = Pick(t.brands, rng);
    std::string code;
    do {
      code = ModelCode(brand, rng);
    } while (!codes.insert(code).second);

    corpus::ProductRecord p;
    char sku[32];
    std::snprintf(sku, sizeof(sku), "%07zu", 1000000 + i);
    p.sku = sku;
    p.fields["title"] = brand + " " + code + " " + Pick(t.adjectives, rng) + " " + leaf.noun;
    p.fields["category"] = std::string(t.top) + " > " + t.middle + " > " + leaf.name;
    p.fields["brand"] = brand;
    for (const auto& s : t.specs) p.fields[std::string("spec:") + s.key] = Pick(s.values, rng);
    const char* f1 = Pick(t.features, rng);
    const char* f2 = Pick(t.features, rng);
    p.fields["description"] = "The " + brand + " " + leaf.noun + " comes with " + f1 +
                              (f1 != f2 ? std::string(" and ") + f2 : std::string()) +
                              ". A great pick for " + Pick(t.uses, rng) + ".";
    products.push_back(std::move(p));
  }

  SyntheticCorpus out;
  out.catalog = corpus::Catalog(std::move(products));
  const auto& catalog = out.catalog.products();

  // Popularity: Zipf over a seeded permutation of the catalog.
  std::vector<std::size_t> by_rank(catalog.size());
  for (std::size_t i = 0; i < by_rank.size(); ++i) by_rank[i] = i;
  Shuffle(by_rank.begin(), by_rank.end(), rng);
  std::vector<double> cdf(catalog.size());
  double total = 0.0;
  for (std::size_t r = 0; r < catalog.size(); ++r) {
    total += 1.0 / std::pow(static_cast<double>(r + 1), spec.popularity_skew);
    cdf[r] = total;
  }

  const curation::TemplateGenerator generator;
  std::vector<std::vector<std::string>> query_pool(catalog.size());
  const std::int64_t t0 = 1700000000;
  for (std::size_t s = 0; s < spec.sessions; ++s) {
    const double u = UniformUnit(rng) * total;
    const std::size_t rank = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
        catalog.size() - 1);
    const std::size_t product = by_rank[rank];
    auto& pool = query_pool[product];
    if (pool.empty()) {
      pool = curation::GenerateSyntheticQueries(catalog[product], 12, generator, spec.seed ^ 0x5eed);
    }
    // Geometric preference for the earlier (more generic) templates.
    std::size_t q = 0;
    while (q + 1 < pool.size() && UniformUnit(rng) < 0.75) ++q;
    std::vector<std::string> words = SplitWords(pool[q]);
    if (words.size() > 2 && UniformUnit(rng) < 0.25) {
      words.erase(words.begin() + static_cast<std::ptrdiff_t>(UniformIndex(rng, words.size())));
    }
    const std::string query = Join(words, " ");
    std::size_t converted = product;
    if (UniformUnit(rng) < spec.noise_rate) converted = UniformIndex(rng, catalog.size());

    char visitor[32];
    std::snprintf(visitor, sizeof(visitor), "v%06zu",
                  static_cast<std::size_t>(UniformIndex(rng, spec.visitors)));
    const std::int64_t ts = t0 + static_cast<std::int64_t>(UniformIndex(rng, 180 * 86400));
    const std::size_t signals = 1 + UniformIndex(rng, 2);
    for (std::size_t k = 0; k < signals; ++k) {
      out.events.push_back({visitor, query, catalog[converted].sku, DrawSignal(rng),
                            ts + static_cast<std::int64_t>(k) * 30});
    }
    out.history[NormalizeQuery(query)] += 1;
  }
  return out;
}

}  // namespace ebr::synthetic
