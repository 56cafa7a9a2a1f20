// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qtraj/config.hpp"
#include "qtraj/errors.hpp"

namespace qtraj {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::filesystem::path ensure_directory(const std::string &dir) {
    std::filesystem::path p(dir.empty() ? "." : dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec || !std::filesystem::is_directory(p)) {
        throw IoError("cannot create output directory '" + p.string() + "'");
    }
    return p;
}

/// Metadata block shared by every output file.
inline ordered_json output_metadata(const RunConfig &cfg, const std::string &command) {
    ordered_json m;
    m["artifact"] = "qtraj";
    m["version"] = kVersion;
    m["command"] = command;
    m["seed"] = cfg.seed;
    m["config"] = to_json(cfg);
    return m;
}

/// CSV file with a '#'-prefixed metadata header and a fixed column order.
class CsvWriter {
   public:
    CsvWriter(const std::filesystem::path &path, const ordered_json &metadata, const std::vector<std::string> &columns,
              const std::vector<std::pair<std::string, std::string>> &extra = {})
        : path_(path), out_(path, std::ios::binary) {
        if (!out_) {
            throw IoError("cannot open '" + path.string() + "' for writing");
        }
        out_ << "# qtraj " << kVersion << "\n";
        out_ << "# seed " << metadata.value("seed", std::uint64_t{0}) << "\n";
        out_ << "# metadata " << metadata.dump() << "\n";
        for (const auto &[k, v] : extra) {
            out_ << "# " << k << " " << v << "\n";
        }
        for (std::size_t i = 0; i < columns.size(); ++i) {
            out_ << (i ? "," : "") << columns[i];
        }
        out_ << "\n";
        check();
    }

    template <typename... Ts>
    void row(const Ts &...fields) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(fields), first = false), ...);
        out_ << "\n";
    }

    void close() {
        out_.close();
        if (out_.fail()) {
            throw IoError("failed writing '" + path_.string() + "'");
        }
    }
    ~CsvWriter() {
        if (out_.is_open()) {
            out_.close();
        }
    }

   private:
    static std::string cell(double x) {
        return format_double(x);
    }
    static std::string cell(const std::string &s) {
        return s;
    }
    static std::string cell(const char *s) {
        return s;
    }
    template <typename T>
    static std::string cell(const T &x) {
        return std::to_string(x);
    }
    void check() {
        if (!out_) {
            throw IoError("failed writing '" + path_.string() + "'");
        }
    }

    std::filesystem::path path_;
    std::ofstream out_;
};

inline void write_json(const std::filesystem::path &path, const ordered_json &doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << doc.dump(2) << "\n";
    out.close();
    if (out.fail()) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

/// Reads the '# metadata' header and the data rows of a CSV written by CsvWriter.
struct CsvTable {
    nlohmann::json metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string &name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) {
                return i;
            }
        }
        throw IoError("missing column '" + name + "'");
    }
};

inline std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline CsvTable read_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.rfind("# metadata ", 0) == 0) {
            t.metadata = nlohmann::json::parse(line.substr(11));
            continue;
        }
        if (!line.empty() && line[0] == '#') {
            continue;
        }
        if (!have_header) {
            t.columns = split_csv_line(line);
            have_header = true;
            continue;
        }
        if (!line.empty()) {
            t.rows.push_back(split_csv_line(line));
        }
    }
    return t;
}

}  // namespace qtraj
