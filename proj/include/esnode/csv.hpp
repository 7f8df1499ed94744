#pragma once

#include "esnode/common.hpp"

#include <string>
#include <vector>

namespace esnode {

struct CsvTable {
    std::vector<std::string> header;
    Matrix data;  // rows x header.size()
};

// Numbers are written with %.17g so they parse back to the same double.
std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

// Columns of equal length into a table.
CsvTable make_table(std::vector<std::string> header, const std::vector<Vector>& columns);

}  // namespace esnode
