#include "alphagp/panel_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <utility>

#include "alphagp/parser.hpp"

namespace alphagp {

namespace {

constexpr const char* kHeader =
    "date,stock_id,open,high,low,close,vwap,volume,turnover,"
    "limit_up,limit_down,suspended,st";
constexpr int kNumColumns = 13;
constexpr int kNumCsvFields = 7;  // numeric columns; returns is derived

struct RawRow {
  std::string date;
  std::string stock;
  double values[kNumCsvFields];
  bool flags[4];
};

double ParseCell(const std::string& cell, int line) {
  if (cell.empty()) return Missing();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw PanelError(PanelError::Kind::MalformedRow,
                     "line " + std::to_string(line) + ": bad number '" + cell + "'",
                     line);
  }
  return value;
}

bool ParseFlag(const std::string& cell, int line) {
  if (cell == "0") return false;
  if (cell == "1") return true;
  throw PanelError(PanelError::Kind::MalformedRow,
                   "line " + std::to_string(line) + ": flag must be 0 or 1, got '" +
                       cell + "'",
                   line);
}

class CsvAccumulator {
 public:
  void AddStream(std::istream& in, const std::string& source_name) {
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) {
      throw PanelError(PanelError::Kind::EmptyInput,
                       source_name + ": empty file");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) {
      throw PanelError(PanelError::Kind::MalformedRow,
                       source_name + ": bad header", 1);
    }
    std::vector<std::string> cells;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      cells.clear();
      std::size_t start = 0;
      while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
          cells.push_back(line.substr(start));
          break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
      }
      if (static_cast<int>(cells.size()) != kNumColumns) {
        throw PanelError(PanelError::Kind::MalformedRow,
                         source_name + ": line " + std::to_string(line_no) +
                             ": expected " + std::to_string(kNumColumns) +
                             " columns, got " + std::to_string(cells.size()),
                         line_no);
      }
      RawRow row;
      row.date = cells[0];
      row.stock = cells[1];
      for (int f = 0; f < kNumCsvFields; ++f) {
        row.values[f] = ParseCell(cells[2 + f], line_no);
      }
      for (int f = 0; f < 4; ++f) {
        row.flags[f] = ParseFlag(cells[2 + kNumCsvFields + f], line_no);
      }
      auto key = std::make_pair(row.date, row.stock);
      if (!seen_.insert(key).second) {
        throw PanelError(PanelError::Kind::DuplicateCell,
                         source_name + ": line " + std::to_string(line_no) +
                             ": duplicate cell " + row.date + "/" + row.stock,
                         line_no);
      }
      rows_.push_back(std::move(row));
    }
  }

  MarketPanel Build(const std::string& id) const {
    if (rows_.empty()) {
      throw PanelError(PanelError::Kind::EmptyInput, id + ": no data rows");
    }
    std::map<std::string, int> date_index, stock_index;
    for (const auto& row : rows_) {
      date_index.emplace(row.date, 0);
      stock_index.emplace(row.stock, 0);
    }
    MarketPanel panel;
    panel.id = id;
    for (auto& [date, idx] : date_index) {
      idx = panel.NumDates();
      panel.dates.push_back(date);
    }
    for (auto& [stock, idx] : stock_index) {
      idx = panel.NumStocks();
      panel.stocks.push_back(stock);
    }
    const int n_dates = panel.NumDates();
    const int n_stocks = panel.NumStocks();
    panel.fields.assign(PanelFieldNames().size(), Matrix(n_dates, n_stocks));
    panel.limit_up = BoolMatrix(n_dates, n_stocks);
    panel.limit_down = BoolMatrix(n_dates, n_stocks);
    panel.suspended = BoolMatrix(n_dates, n_stocks);
    panel.st = BoolMatrix(n_dates, n_stocks);
    for (const auto& row : rows_) {
      int t = date_index[row.date];
      int i = stock_index[row.stock];
      for (int f = 0; f < kNumCsvFields; ++f) {
        panel.fields[f].At(t, i) = row.values[f];
      }
      panel.limit_up.Set(t, i, row.flags[0]);
      panel.limit_down.Set(t, i, row.flags[1]);
      panel.suspended.Set(t, i, row.flags[2]);
      panel.st.Set(t, i, row.flags[3]);
    }
    FinalizePanel(panel);
    return panel;
  }

 private:
  std::vector<RawRow> rows_;
  std::set<std::pair<std::string, std::string>> seen_;
};

}  // namespace

MarketPanel LoadPanelCsv(const std::string& path) {
  return LoadPanelCsv(std::vector<std::string>{path});
}

MarketPanel LoadPanelCsv(const std::vector<std::string>& paths) {
  if (paths.empty()) {
    throw PanelError(PanelError::Kind::EmptyInput, "no panel files given");
  }
  CsvAccumulator acc;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) {
      throw IoError("cannot open panel file: " + path);
    }
    acc.AddStream(in, path);
  }
  std::string id = paths[0];
  for (std::size_t i = 1; i < paths.size(); ++i) id += "+" + paths[i];
  return acc.Build(id);
}

MarketPanel ReadPanelCsv(std::istream& in, const std::string& source_name) {
  CsvAccumulator acc;
  acc.AddStream(in, source_name);
  return acc.Build(source_name);
}

void WritePanelCsv(const MarketPanel& panel, std::ostream& out) {
  out << kHeader << "\n";
  for (int t = 0; t < panel.NumDates(); ++t) {
    for (int i = 0; i < panel.NumStocks(); ++i) {
      out << panel.dates[t] << ',' << panel.stocks[i];
      for (int f = 0; f < kNumCsvFields; ++f) {
        out << ',';
        double v = panel.fields[f].At(t, i);
        if (!IsMissing(v)) out << FormatDouble(v);
      }
      out << ',' << (panel.limit_up.At(t, i) ? '1' : '0');
      out << ',' << (panel.limit_down.At(t, i) ? '1' : '0');
      out << ',' << (panel.suspended.At(t, i) ? '1' : '0');
      out << ',' << (panel.st.At(t, i) ? '1' : '0');
      out << '\n';
    }
  }
}

void WritePanelCsvFile(const MarketPanel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  WritePanelCsv(panel, out);
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

}  // namespace alphagp
