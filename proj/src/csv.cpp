#include "esnode/csv.hpp"
#include "esnode/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace esnode {

std::string to_csv(const CsvTable& table) {
    require(table.data.cols() == static_cast<Index>(table.header.size()), ErrorKind::DimensionMismatch,
            "csv header and data widths differ");
    std::string out;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j) out += ',';
        out += table.header[j];
    }
    out += '\n';
    for (Index i = 0; i < table.data.rows(); ++i) {
        for (Index j = 0; j < table.data.cols(); ++j) {
            if (j) out += ',';
            out += format_double(table.data(i, j));
        }
        out += '\n';
    }
    return out;
}

CsvTable parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    CsvTable t;
    if (!std::getline(in, line)) raise(ErrorKind::Io, "empty csv");
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) t.header.push_back(cell);
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) raise(ErrorKind::Io, "bad csv number '" + cell + "'");
            row.push_back(v);
        }
        if (row.size() != t.header.size()) raise(ErrorKind::Io, "csv row width differs from header");
        rows.push_back(std::move(row));
    }
    t.data.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            t.data(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return t;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream os(path);
    if (!os) raise(ErrorKind::Io, "cannot write " + path);
    os << to_csv(table);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Io, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

CsvTable make_table(std::vector<std::string> header, const std::vector<Vector>& columns) {
    require(header.size() == columns.size(), ErrorKind::DimensionMismatch, "header/column count mismatch");
    CsvTable t;
    t.header = std::move(header);
    const Index rows = columns.empty() ? 0 : columns.front().size();
    t.data.resize(rows, static_cast<Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        require(columns[j].size() == rows, ErrorKind::DimensionMismatch, "csv columns differ in length");
        t.data.col(static_cast<Index>(j)) = columns[j];
    }
    return t;
}

}  // namespace esnode
