#include "cachemux/trace.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cachemux {

namespace {

[[noreturn]] void fail_at(const std::string& path, std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ": " << what;
  throw std::runtime_error(os.str());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

}  // namespace

QueryCatalog load_trace(const std::string& path, std::optional<CostBounds> bounds,
                        bool strict_replay) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty trace file");
  ++line_no;
  if (split_csv(line) != std::vector<std::string>{"query_id", "model_index", "cost"})
    fail_at(path, line_no, "expected header 'query_id,model_index,cost'");

  struct Row {
    QueryId query;
    std::size_t model;
    double cost;
  };
  std::vector<Row> rows;
  std::size_t max_query = 0;
  std::size_t max_model = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) fail_at(path, line_no, "expected 3 fields");
    Row row{};
    unsigned long q = 0, m = 0;
    auto qr = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), q);
    if (qr.ec != std::errc{} || qr.ptr != fields[0].data() + fields[0].size())
      fail_at(path, line_no, "bad query_id '" + fields[0] + "'");
    auto mr = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), m);
    if (mr.ec != std::errc{} || mr.ptr != fields[1].data() + fields[1].size())
      fail_at(path, line_no, "bad model_index '" + fields[1] + "'");
    try {
      std::size_t pos = 0;
      row.cost = std::stod(fields[2], &pos);
      if (pos != fields[2].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      fail_at(path, line_no, "bad cost '" + fields[2] + "'");
    }
    if (row.cost <= 0.0) fail_at(path, line_no, "costs must be positive");
    if (bounds && (row.cost < bounds->lo || row.cost > bounds->hi))
      fail_at(path, line_no, "cost outside declared bounds");
    row.query = static_cast<QueryId>(q);
    row.model = m;
    max_query = std::max<std::size_t>(max_query, q);
    max_model = std::max<std::size_t>(max_model, m);
    rows.push_back(row);
  }
  if (rows.empty()) throw std::runtime_error(path + ": trace has no data rows");

  const std::size_t num_queries = max_query + 1;
  const std::size_t num_models = max_model + 1;
  std::vector<std::vector<std::vector<double>>> samples(
      num_queries, std::vector<std::vector<double>>(num_models));
  std::vector<double> arrival_counts(num_queries, 0.0);
  for (const Row& row : rows) {
    samples[row.query][row.model].push_back(row.cost);
    arrival_counts[row.query] += 1.0;
  }

  std::vector<std::vector<CostModel>> models(num_queries);
  for (std::size_t q = 0; q < num_queries; ++q) {
    models[q].reserve(num_models);
    for (std::size_t k = 0; k < num_models; ++k) {
      if (samples[q][k].empty()) {
        std::ostringstream os;
        os << path << ": no samples for query " << q << ", model " << k;
        throw std::runtime_error(os.str());
      }
      models[q].push_back(CostModel::empirical(std::move(samples[q][k]), strict_replay));
    }
  }

  const double total = static_cast<double>(rows.size());
  std::vector<double> weights(num_queries);
  for (std::size_t q = 0; q < num_queries; ++q) weights[q] = arrival_counts[q] / total;

  return QueryCatalog(FrequencyDistribution::from_weights(std::move(weights)),
                      std::move(models), bounds);
}

}  // namespace cachemux
