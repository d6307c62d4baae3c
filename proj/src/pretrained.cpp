#include "idr/pretrained.hpp"

#include <functional>
#include <istream>
#include <ostream>

#include "text_util.hpp"

namespace idr {

std::string sentence_id(std::string_view relation_id, ArgSlot slot) {
  return std::string(relation_id) + (slot == ArgSlot::arg1 ? "#arg1" : "#arg2");
}

void SentenceVectorStore::insert(std::string id, std::vector<float> vec) {
  if (vec.size() != dimension_)
    throw shape_error("vector '" + id + "' has " + std::to_string(vec.size()) +
                      " values, store dimension is " + std::to_string(dimension_));
  if (vectors_.count(id)) throw invalid_argument_error("duplicate id '" + id + "'");
  ids_.push_back(id);
  vectors_.emplace(std::move(id), std::move(vec));
}

const std::vector<float>& SentenceVectorStore::lookup(const std::string& id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) throw missing_id_error(id);
  return it->second;
}

namespace {

using LineSink = std::function<void(std::size_t lineno, std::string id, std::vector<float>)>;

std::vector<std::uint64_t> read_header(std::istream& in, const std::string& source,
                                       std::size_t fields) {
  std::string line;
  if (!std::getline(in, line)) throw format_error(source, 1, "missing header");
  auto parts = text::split(text::chomp(line), ' ');
  if (parts.size() != fields)
    throw format_error(source, 1, "malformed header, expected " + std::to_string(fields) +
                                      " integers separated by single spaces");
  std::vector<std::uint64_t> out;
  for (auto p : parts) {
    auto v = text::parse_uint(p);
    if (!v) throw format_error(source, 1, "malformed header field '" + std::string(p) + "'");
    out.push_back(*v);
  }
  if (out.back() == 0) throw format_error(source, 1, "dimension must be positive");
  return out;
}

void read_body(std::istream& in, const std::string& source, std::size_t count, std::size_t dim,
               std::size_t& lineno, const LineSink& sink) {
  std::string line;
  for (std::size_t n = 0; n < count; ++n) {
    ++lineno;
    if (!std::getline(in, line))
      throw format_error(source, lineno, "expected " + std::to_string(count) +
                                             " entries, file ended early");
    auto parts = text::split(text::chomp(line), ' ');
    if (parts.size() != dim + 1)
      throw format_error(source, lineno,
                         "expected id and " + std::to_string(dim) + " values, found " +
                             std::to_string(parts.size() - 1) + " values");
    if (parts[0].empty()) throw format_error(source, lineno, "empty id");
    std::vector<float> vec(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      auto v = text::parse_float(parts[i + 1]);
      if (!v)
        throw format_error(source, lineno, "bad number '" + std::string(parts[i + 1]) + "'");
      vec[i] = *v;
    }
    sink(lineno, std::string(parts[0]), std::move(vec));
  }
}

void expect_end(std::istream& in, const std::string& source, std::size_t lineno) {
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!text::chomp(line).empty())
      throw format_error(source, lineno, "more entries than the header declares");
  }
}

void insert_checked(SentenceVectorStore& store, const std::string& source, std::size_t lineno,
                    std::string id, std::vector<float> vec) {
  if (store.contains(id)) throw format_error(source, lineno, "duplicate id '" + id + "'");
  store.insert(std::move(id), std::move(vec));
}

void write_entries(std::ostream& out, const SentenceVectorStore& store) {
  for (const auto& id : store.ids()) {
    out << id;
    for (float v : store.lookup(id)) out << ' ' << text::format_float(v);
    out << '\n';
  }
}

}  // namespace

SentenceVectorStore load_vector_file(const std::filesystem::path& path) {
  const std::string source = path.string();
  auto in = text::open_input(path);
  auto header = read_header(in, source, 2);
  SentenceVectorStore store(header[1], path.stem().string());
  std::size_t lineno = 1;
  read_body(in, source, header[0], header[1], lineno,
            [&](std::size_t ln, std::string id, std::vector<float> vec) {
              insert_checked(store, source, ln, std::move(id), std::move(vec));
            });
  expect_end(in, source, lineno);
  return store;
}

void save_vector_file(const SentenceVectorStore& store, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  out << store.size() << ' ' << store.dimension() << '\n';
  write_entries(out, store);
}

std::string NgramTable::bigram_key(std::string_view left, std::string_view right) {
  std::string key(left);
  key += '_';
  key += right;
  return key;
}

void NgramTable::add_unigram(std::string token, std::vector<float> vec) {
  unigrams_.insert(std::move(token), std::move(vec));
}

void NgramTable::add_bigram(std::string_view left, std::string_view right,
                            std::vector<float> vec) {
  bigrams_.insert(bigram_key(left, right), std::move(vec));
}

void NgramTable::add_bigram_key(std::string key, std::vector<float> vec) {
  bigrams_.insert(std::move(key), std::move(vec));
}

const std::vector<float>* NgramTable::unigram(const std::string& token) const {
  return unigrams_.contains(token) ? &unigrams_.lookup(token) : nullptr;
}

const std::vector<float>* NgramTable::bigram(std::string_view left, std::string_view right) const {
  const auto key = bigram_key(left, right);
  return bigrams_.contains(key) ? &bigrams_.lookup(key) : nullptr;
}

NgramTable load_ngram_table(const std::filesystem::path& path) {
  const std::string source = path.string();
  auto in = text::open_input(path);
  auto header = read_header(in, source, 3);
  NgramTable table(header[2]);
  std::size_t lineno = 1;
  read_body(in, source, header[0], header[2], lineno,
            [&](std::size_t ln, std::string id, std::vector<float> vec) {
              if (table.unigram(id)) throw format_error(source, ln, "duplicate id '" + id + "'");
              table.add_unigram(std::move(id), std::move(vec));
            });
  read_body(in, source, header[1], header[2], lineno,
            [&](std::size_t ln, std::string id, std::vector<float> vec) {
              if (id.find('_') == std::string::npos)
                throw format_error(source, ln, "bigram id '" + id + "' has no '_' separator");
              if (table.bigrams().contains(id))
                throw format_error(source, ln, "duplicate id '" + id + "'");
              table.add_bigram_key(std::move(id), std::move(vec));
            });
  expect_end(in, source, lineno);
  return table;
}

void save_ngram_table(const NgramTable& table, const std::filesystem::path& path) {
  auto out = text::open_output(path);
  out << table.unigrams().size() << ' ' << table.bigrams().size() << ' ' << table.dimension()
      << '\n';
  write_entries(out, table.unigrams());
  write_entries(out, table.bigrams());
}

SentenceRepresentation sent2vec_compose(const TokenSequence& seq, const NgramTable& table) {
  if (seq.empty()) throw invalid_argument_error("sent2vec_compose: empty token sequence");
  std::vector<double> sum(table.dimension(), 0.0);
  std::size_t found = 0;
  auto add = [&](const std::vector<float>* v) {
    if (!v) return;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
    ++found;
  };
  for (std::size_t t = 0; t < seq.size(); ++t) {
    add(table.unigram(seq[t]));
    if (t + 1 < seq.size()) add(table.bigram(seq[t], seq[t + 1]));
  }
  if (found == 0)
    throw empty_composition_error("sent2vec_compose: none of the sentence's n-grams are in the table");
  SentenceRepresentation rep;
  rep.provenance = Provenance::pretrained;
  rep.values.resize(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i)
    rep.values[i] = static_cast<float>(sum[i] / static_cast<double>(found));
  return rep;
}

}  // namespace idr
