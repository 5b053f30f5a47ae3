#include "retrorank/corpus/synthetic.hpp"

#include <array>
#include <string>

#include "retrorank/corpus/tokenize.hpp"
#include "retrorank/numcore/errors.hpp"
#include "retrorank/numcore/prng.hpp"

namespace retrorank {
namespace {

constexpr std::array<const char*, 20> kKeys{"printer", "wifi",  "screen", "sound",   "mouse",  "keyboard", "battery",
                                             "kernel",  "disk",  "fan",    "camera",  "router", "webcam",   "touchpad",
                                             "monitor", "modem", "shell",  "desktop", "update", "bluetooth"};
constexpr std::array<const char*, 20> kAnswers{"cups",  "nmcli",  "xrandr", "alsamixer", "xinput", "setxkbmap", "tlp",
                                               "grub",  "fsck",   "lm-sensors", "cheese", "dhclient", "v4l2",
                                               "synclient", "ddcutil", "pppconfig", "bashrc", "gnome", "apt", "bluez"};
constexpr std::array<const char*, 10> kModifiers{"today", "again",  "randomly", "sometimes", "lately",
                                                 "daily", "slowly", "suddenly", "twice",     "constantly"};
constexpr std::array<const char*, 6> kOpeners{"hi all", "hello everyone", "hey there , quick question", "good morning",
                                              "hi , anyone around ?", "hello , i need help"};
// {key} and {mod} are substituted.
constexpr std::array<const char*, 6> kProblems{"help , my {key} broke {mod}",
                                               "any idea how to fix it ? the {key} fails {mod}",
                                               "since the upgrade the {key} stops {mod}",
                                               "can you check ? {key} dead {mod}",
                                               "i tried everything , {key} crashes {mod}",
                                               "is there a fix ? {key} not working {mod}"};
constexpr std::array<const char*, 6> kFillers{"anyone ?", "thanks in advance .", "please help !",
                                              "i am on ubuntu , by the way", "it is urgent for work .",
                                              "sorry for my english"};
// {ans} is substituted; each key always gets the same template.
constexpr std::array<const char*, 5> kResponses{"reboot and try {ans}", "that should work with {ans}",
                                                "you need {ans}", "run sudo {ans}", "the fix is {ans}"};

std::string fill(std::string text, const std::string& slot, const std::string& value) {
  const std::string marker = "{" + slot + "}";
  for (auto pos = text.find(marker); pos != std::string::npos; pos = text.find(marker)) text.replace(pos, marker.size(), value);
  return text;
}

template <std::size_t N>
const char* pick(const std::array<const char*, N>& items, Prng& rng) {
  return items[static_cast<std::size_t>(rng.below(N))];
}

}  // namespace

std::vector<Example> generate_synthetic(const SyntheticOptions& options) {
  if (options.num_keys == 0 || options.num_keys > kKeys.size() || options.num_modifiers == 0 ||
      options.num_modifiers > kModifiers.size()) {
    throw ConfigError("synthetic generator supports 1..20 keys and 1..10 modifiers");
  }
  Prng rng(options.seed);
  std::vector<std::pair<std::size_t, std::size_t>> combos;
  for (std::size_t k = 0; k < options.num_keys; ++k)
    for (std::size_t m = 0; m < options.num_modifiers; ++m) combos.emplace_back(k, m);

  TokenizerOptions tok;
  std::vector<Example> out;
  std::vector<std::pair<std::size_t, std::size_t>> deck;
  for (std::size_t n = 0; n < options.num_pairs; ++n) {
    std::size_t key = 0, mod = 0;
    if (options.cover_combinations) {
      if (deck.empty()) {
        deck = combos;
        rng.shuffle(deck);
      }
      std::tie(key, mod) = deck.back();
      deck.pop_back();
    } else {
      key = static_cast<std::size_t>(rng.below(options.num_keys));
      mod = static_cast<std::size_t>(rng.below(options.num_modifiers));
    }
    Example ex;
    if (rng.bernoulli(0.5)) ex.context.push_back({"user", tokenize(pick(kOpeners, rng), tok)});
    std::string problem = fill(fill(pick(kProblems, rng), "key", kKeys[key]), "mod", kModifiers[mod]);
    ex.context.push_back({"user", tokenize(problem, tok)});
    if (rng.bernoulli(options.penultimate_rate)) ex.context.push_back({"user", tokenize(pick(kFillers, rng), tok)});
    std::string response = fill(kResponses[key % kResponses.size()], "ans", kAnswers[key]);
    ex.response = tokenize(response, tok);
    ex.label = 1;
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace retrorank
