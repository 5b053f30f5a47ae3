#include "retrorank/corpus/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "retrorank/numcore/errors.hpp"

namespace retrorank {

Tensor random_embeddings(std::size_t rows, std::size_t dim, Prng& rng) {
  Tensor t(Shape{rows, dim}, 0.0);
  for (double& v : t.data()) v = rng.uniform(-0.05, 0.05);
  for (std::size_t c = 0; c < dim; ++c) t.at(Vocab::kPad, c) = 0.0;
  return t;
}

Tensor load_embeddings(const std::filesystem::path& path, const Vocab& vocab, std::size_t dim, Prng& rng) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file " + path.string());
  const std::string source = path.string();
  Tensor table = random_embeddings(vocab.size(), dim, rng);

  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header line \"count dim\"");
  {
    std::istringstream header(line);
    std::size_t count = 0, file_dim = 0;
    if (!(header >> count >> file_dim)) throw ParseError(source, 1, "header must be \"count dim\"");
    if (file_dim != dim) {
      throw ParseError(source, 1, "embedding dim " + std::to_string(file_dim) + " does not match model dim " +
                                      std::to_string(dim));
    }
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    values.clear();
    std::string num;
    while (fields >> num) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
      if (ec != std::errc() || ptr != num.data() + num.size()) {
        throw ParseError(source, lineno, "malformed number '" + num + "'");
      }
      values.push_back(v);
    }
    if (values.size() != dim) {
      throw ParseError(source, lineno, "expected " + std::to_string(dim) + " values for '" + token + "', got " +
                                           std::to_string(values.size()));
    }
    if (!vocab.contains(token)) continue;
    const int id = vocab.id(token);
    if (id == Vocab::kPad) continue;
    for (std::size_t c = 0; c < dim; ++c) table.at(static_cast<std::size_t>(id), c) = values[c];
  }
  return table;
}

}  // namespace retrorank
