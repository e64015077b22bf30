#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "alphagp/panel.hpp"

namespace alphagp {

// CSV layout: header
//   date,stock_id,open,high,low,close,vwap,volume,turnover,limit_up,limit_down,suspended,st
// one row per (date, stock) cell, numeric fields empty when missing, flags
// 0/1. Row order in written files is date-major, stock order as in the
// panel.

// Throws PanelError (MalformedRow carries the 1-based line number,
// DuplicateCell, EmptyInput) and IoError when the file cannot be opened.
MarketPanel LoadPanelCsv(const std::string& path);

// Union of several files covering disjoint cells; a repeated (date, stock)
// across files is a DuplicateCell.
MarketPanel LoadPanelCsv(const std::vector<std::string>& paths);

MarketPanel ReadPanelCsv(std::istream& in, const std::string& source_name);

void WritePanelCsv(const MarketPanel& panel, std::ostream& out);
void WritePanelCsvFile(const MarketPanel& panel, const std::string& path);

}  // namespace alphagp
