#pragma once

#include <filesystem>

#include "retrorank/corpus/vocab.hpp"
#include "retrorank/numcore/prng.hpp"
#include "retrorank/numcore/tensor.hpp"

namespace retrorank {

// Uniform(-0.05, 0.05) rows with the PAD row zeroed.
Tensor random_embeddings(std::size_t rows, std::size_t dim, Prng& rng);

// word2vec text format: header "count dim", then "token v1 ... v_dim" per line.
// Vocabulary rows found in the file take its values; the rest keep the
// random initialization. The PAD row stays zero.
Tensor load_embeddings(const std::filesystem::path& path, const Vocab& vocab, std::size_t dim, Prng& rng);

}  // namespace retrorank
