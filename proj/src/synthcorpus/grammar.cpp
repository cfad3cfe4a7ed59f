#include "e2eslu/synthcorpus/grammar.hpp"

#include <set>
#include <sstream>
#include <unordered_set>

#include "e2eslu/errors.hpp"

namespace e2eslu {

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool is_placeholder(const std::string& tok) {
  return tok.size() > 2 && tok.front() == '{' && tok.back() == '}';
}

std::string placeholder_name(const std::string& tok) { return tok.substr(1, tok.size() - 2); }

template <class T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[static_cast<std::size_t>(rng.below(items.size()))];
}

}  // namespace

std::string OpenValueGenerator::generate(Rng& rng) const {
  if (syllables.empty()) throw DataError("open value generator has no syllables");
  const std::size_t words = min_words + rng.below(max_words - min_words + 1);
  std::string out;
  for (std::size_t w = 0; w < words; ++w) {
    if (w) out += ' ';
    const std::size_t syl = min_syllables + rng.below(max_syllables - min_syllables + 1);
    for (std::size_t s = 0; s < syl; ++s) out += pick(syllables, rng);
  }
  return out;
}

void Grammar::validate() const {
  if (intents.empty()) throw DataError("grammar has no intents");
  std::set<std::string> names;
  for (const auto& st : slot_types) {
    if (st.name.empty() || st.name == kNullSlotName) throw DataError("invalid slot type name");
    if (!names.insert(st.name).second) throw DataError("duplicate slot type " + st.name);
  }
  for (const auto& intent : intents) {
    if (intent.templates.empty()) throw DataError("intent " + intent.name + " has no template");
    for (const auto& t : intent.templates) {
      const auto toks = split_words(t);
      if (toks.empty()) throw DataError("empty template in intent " + intent.name);
      std::string prev;
      for (const auto& tok : toks) {
        if (is_placeholder(tok)) {
          const std::string name = placeholder_name(tok);
          if (!names.count(name)) {
            throw DataError("template '" + t + "' references undeclared slot type " + name);
          }
          if (name == prev) {
            throw DataError("template '" + t + "' places two " + name + " slots side by side");
          }
          prev = name;
        } else {
          prev.clear();
        }
      }
    }
  }
}

IntentSet Grammar::intent_set() const {
  std::vector<std::string> names;
  for (const auto& i : intents) names.push_back(i.name);
  return IntentSet(std::move(names));
}

SlotLabelSet Grammar::slot_labels() const {
  std::vector<std::string> names;
  for (const auto& s : slot_types) names.push_back(s.name);
  return SlotLabelSet::from_labels(std::move(names));
}

std::vector<Utterance> generate_utterances(const Grammar& grammar, std::size_t n,
                                           std::uint64_t seed, ValueSource source,
                                           const std::string& id_prefix) {
  if (n == 0) throw ConfigError("generate_utterances: n must be at least 1");
  grammar.validate();
  std::vector<std::unordered_set<std::string>> known(grammar.slot_types.size());
  for (std::size_t s = 0; s < grammar.slot_types.size(); ++s) {
    known[s].insert(grammar.slot_types[s].lexicon.begin(), grammar.slot_types[s].lexicon.end());
  }
  auto slot_index = [&](const std::string& name) {
    for (std::size_t s = 0; s < grammar.slot_types.size(); ++s) {
      if (grammar.slot_types[s].name == name) return s;
    }
    throw DataError("unknown slot type " + name);
  };

  const Rng root(seed);
  std::vector<Utterance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = root.derive(i);
    Utterance u;
    u.id = id_prefix + "-" + std::to_string(i);
    u.intent = static_cast<int>(rng.below(grammar.intents.size()));
    const auto& spec = grammar.intents[static_cast<std::size_t>(u.intent)];
    const auto toks = split_words(pick(spec.templates, rng));

    if (!grammar.carrier_prefixes.empty() && rng.uniform() < grammar.carrier_probability) {
      for (auto& w : split_words(pick(grammar.carrier_prefixes, rng))) u.words.push_back(w);
    }
    for (const auto& tok : toks) {
      if (!is_placeholder(tok)) {
        u.words.push_back(tok);
        continue;
      }
      const std::size_t s = slot_index(placeholder_name(tok));
      const SlotType& st = grammar.slot_types[s];
      std::string value;
      if (source == ValueSource::kNovel && st.open) {
        do {
          value = st.open->generate(rng);
        } while (known[s].count(value));
      } else {
        if (st.lexicon.empty()) throw DataError("slot type " + st.name + " has an empty lexicon");
        value = pick(st.lexicon, rng);
      }
      GoldSlot slot;
      slot.label = static_cast<int>(s) + 1;
      slot.value = value;
      slot.start_word = u.words.size();
      for (auto& w : split_words(value)) u.words.push_back(w);
      slot.end_word = u.words.size();
      u.slots.push_back(std::move(slot));
    }
    if (!grammar.carrier_suffixes.empty() && rng.uniform() < grammar.carrier_probability) {
      for (auto& w : split_words(pick(grammar.carrier_suffixes, rng))) u.words.push_back(w);
    }
    out.push_back(std::move(u));
  }
  return out;
}

Grammar voice_assistant_grammar(std::uint64_t seed, std::size_t lexicon_size) {
  const std::vector<std::string> syllables = {"ka", "lo", "mi", "ne", "ru", "sa", "to",
                                              "vi", "de", "po", "zu", "fa", "ri", "mo",
                                              "te", "la", "ni", "go", "be", "su"};
  auto open = [&](std::size_t min_words, std::size_t max_words) {
    OpenValueGenerator g;
    g.syllables = syllables;
    g.min_syllables = 2;
    g.max_syllables = 3;
    g.min_words = min_words;
    g.max_words = max_words;
    return g;
  };

  Grammar g;
  g.intents = {
      {"PlayMusic",
       {"play {song}", "play {song} by {artist}", "play some {artist}", "play {artist} radio",
        "i want to hear {song} by {artist}", "put on {song} in the {room}"}},
      {"CallContact", {"call {contact}", "call {contact} now", "phone {contact}",
                       "ring {contact} please"}},
      {"SendMessage", {"send a message to {contact}", "text {contact} that i am late",
                       "message {contact}", "tell {contact} i will call back"}},
      {"GetWeather", {"what is the weather in {city}", "weather for {city}",
                      "will it rain in {city} tomorrow", "{city} weather"}},
      {"Navigate", {"navigate to {city}", "directions to {city}", "take me to {city}",
                    "{city} directions", "how far is {city}"}},
      {"SetAlarm", {"set an alarm for {time}", "wake me up at {time}",
                    "alarm at {time} in the {room}"}},
      {"TurnOnDevice", {"turn on the {device}", "turn on the {device} in the {room}",
                        "switch on the {room} {device}"}},
      {"TurnOffDevice", {"turn off the {device}", "turn off the {device} in the {room}",
                         "switch off the {room} {device}"}},
      {"AddToList", {"add {item} to my {list} list", "put {item} on the {list} list",
                     "add {item} to the list"}},
      {"RemoveFromList", {"remove {item} from my {list} list", "take {item} off the list",
                          "remove {item} from the {list} list"}},
  };

  g.slot_types = {
      {"song", {}, open(1, 2)},
      {"artist", {}, open(1, 2)},
      {"contact", {}, open(1, 2)},
      {"city", {}, open(1, 2)},
      {"item", {}, open(1, 1)},
      {"room", {"kitchen", "bedroom", "living room", "bathroom", "office", "garage"}, std::nullopt},
      {"device", {"lights", "fan", "heater", "television", "speaker", "thermostat"}, std::nullopt},
      {"time", {"seven am", "six thirty", "noon", "nine pm", "ten fifteen", "midnight"},
       std::nullopt},
      {"list", {"shopping", "todo", "grocery", "packing"}, std::nullopt},
  };
  g.carrier_prefixes = {"please", "hey", "can you", "could you please"};
  g.carrier_suffixes = {"please", "thanks", "right away"};

  Rng rng(seed);
  std::unordered_set<std::string> used;
  for (auto& st : g.slot_types) {
    if (!st.open) continue;
    while (st.lexicon.size() < lexicon_size) {
      std::string v = st.open->generate(rng);
      if (used.insert(v).second) st.lexicon.push_back(std::move(v));
    }
  }
  g.validate();
  return g;
}

Grammar two_template_grammar() {
  Grammar g;
  g.intents = {{"PlayMusic", {"play {song}"}}, {"Stop", {"stop the music"}}};
  g.slot_types = {{"song", {"kalo", "mire", "tosa"}, std::nullopt}};
  g.carrier_probability = 0;
  g.validate();
  return g;
}

}  // namespace e2eslu
