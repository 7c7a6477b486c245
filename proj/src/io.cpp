#include "mlbm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "mlbm/errors.hpp"

namespace mlbm {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
	std::vector<std::string> fields;
	std::string field;
	bool quoted = false;
	for (std::size_t i = 0; i < line.size(); ++i) {
		const char ch = line[i];
		if (quoted) {
			if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
				field += '"';
				++i;
			} else if (ch == '"') {
				quoted = false;
			} else {
				field += ch;
			}
		} else if (ch == '"') {
			quoted = true;
		} else if (ch == delim) {
			fields.push_back(std::move(field));
			field.clear();
		} else {
			field += ch;
		}
	}
	fields.push_back(std::move(field));
	return fields;
}

std::string trim(std::string s) {
	auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
	s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
	s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
	return s;
}

double parse_number(const std::string& text, const fs::path& path) {
	const auto s = trim(text);
	double v = 0.0;
	const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
	if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
		throw ValidationError(path.string() + ": '" + text + "' is not a number");
	return v;
}

std::string quote(const std::string& s) {
	if (s.find_first_of(",\"\n") == std::string::npos)
		return s;
	std::string out = "\"";
	for (char c : s) {
		if (c == '"')
			out += '"';
		out += c;
	}
	return out + "\"";
}

std::ofstream open_out(const fs::path& path) {
	if (path.has_parent_path()) {
		std::error_code ec;
		fs::create_directories(path.parent_path(), ec);
	}
	std::ofstream out(path);
	if (!out)
		throw IoError("cannot write " + path.string());
	out << std::setprecision(17);
	return out;
}

std::string format_cell(double v) {
	std::ostringstream os;
	os << std::setprecision(17) << v;
	return os.str();
}

} // namespace

std::vector<std::vector<std::string>> read_table(const fs::path& path) {
	std::ifstream in(path);
	if (!in)
		throw IoError("cannot read " + path.string());
	std::vector<std::vector<std::string>> rows;
	std::string line;
	char delim = 0;
	while (std::getline(in, line)) {
		if (!line.empty() && line.back() == '\r')
			line.pop_back();
		if (rows.empty() && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
			line.erase(0, 3);
		if (trim(line).empty())
			continue;
		if (delim == 0)
			delim = line.find('\t') != std::string::npos ? '\t' : ',';
		rows.push_back(split_line(line, delim));
	}
	return rows;
}

LabeledMatrix read_matrix_csv(const fs::path& path) {
	const auto rows = read_table(path);
	if (rows.empty())
		throw ValidationError(path.string() + ": empty matrix file");
	LabeledMatrix m;
	for (std::size_t j = 1; j < rows[0].size(); ++j)
		m.col_names.push_back(trim(rows[0][j]));
	m.values = Matrix(rows.size() - 1, m.col_names.size());
	for (std::size_t i = 1; i < rows.size(); ++i) {
		if (rows[i].size() != m.col_names.size() + 1)
			throw ValidationError(path.string() + ": row " + std::to_string(i + 1) + " has " +
			                      std::to_string(rows[i].size()) + " fields, expected " +
			                      std::to_string(m.col_names.size() + 1));
		m.row_names.push_back(trim(rows[i][0]));
		for (std::size_t j = 1; j < rows[i].size(); ++j)
			m.values(i - 1, j - 1) = parse_number(rows[i][j], path);
	}
	return m;
}

void write_matrix_csv(const fs::path& path, const LabeledMatrix& matrix) {
	auto out = open_out(path);
	for (const auto& c : matrix.col_names)
		out << ',' << quote(c);
	out << '\n';
	for (std::size_t i = 0; i < matrix.values.rows(); ++i) {
		out << quote(matrix.row_names[i]);
		for (std::size_t j = 0; j < matrix.values.cols(); ++j)
			out << ',' << format_cell(matrix.values(i, j));
		out << '\n';
	}
	if (!out)
		throw IoError("failed writing " + path.string());
}

namespace {

std::vector<std::size_t> positions(const std::vector<std::string>& names, const Level& level, const std::string& what,
                                   const std::string& relation) {
	std::unordered_map<std::string, std::size_t> index;
	for (std::size_t i = 0; i < level.unit_names.size(); ++i)
		index.emplace(level.unit_names[i], i);
	if (names.size() != level.size())
		throw ValidationError("relation '" + relation + "': " + std::to_string(names.size()) + " " + what +
		                      " for level '" + level.name + "' of " + std::to_string(level.size()) + " units");
	std::vector<std::size_t> pos;
	std::vector<bool> seen(level.size(), false);
	for (const auto& n : names) {
		auto it = index.find(n);
		if (it == index.end())
			throw ValidationError("relation '" + relation + "': unit '" + n + "' is not in level '" + level.name + "'");
		if (seen[it->second])
			throw ValidationError("relation '" + relation + "': unit '" + n + "' appears twice");
		seen[it->second] = true;
		pos.push_back(it->second);
	}
	return pos;
}

std::vector<std::string> read_unit_file(const fs::path& path) {
	std::ifstream in(path);
	if (!in)
		throw IoError("cannot read " + path.string());
	std::vector<std::string> units;
	std::string line;
	while (std::getline(in, line)) {
		line = trim(line);
		if (!line.empty())
			units.push_back(line);
	}
	return units;
}

} // namespace

MultilevelNetwork network_from_json(const nlohmann::json& spec, const fs::path& base_dir) {
	auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };
	std::vector<Level> levels;
	try {
		for (const auto& lj : spec.at("levels")) {
			Level level;
			level.name = lj.at("name").get<std::string>();
			if (lj.contains("units"))
				level.unit_names = lj.at("units").get<std::vector<std::string>>();
			else if (lj.contains("units_file"))
				level.unit_names = read_unit_file(resolve(lj.at("units_file").get<std::string>()));
			else
				throw ValidationError("level '" + level.name + "' lists no units");
			levels.push_back(std::move(level));
		}
		std::vector<Relation> relations;
		auto level_of = [&](const std::string& name) {
			for (std::size_t l = 0; l < levels.size(); ++l)
				if (levels[l].name == name)
					return l;
			throw ValidationError("unknown level '" + name + "'");
		};
		for (const auto& rj : spec.value("relations", nlohmann::json::array())) {
			Relation r;
			r.name = rj.at("name").get<std::string>();
			r.from_level = level_of(rj.at("from").get<std::string>());
			r.to_level = level_of(rj.at("to").get<std::string>());
			r.diagonal_defined = rj.value("diagonal_defined", false);
			const auto& from = levels[r.from_level];
			const auto& to = levels[r.to_level];
			if (rj.contains("values")) {
				const auto rows = rj.at("values").get<std::vector<std::vector<double>>>();
				r.values = Matrix(rows.size(), rows.empty() ? 0 : rows[0].size());
				for (std::size_t i = 0; i < rows.size(); ++i) {
					if (rows[i].size() != r.values.cols())
						throw ValidationError("relation '" + r.name + "': ragged values");
					for (std::size_t j = 0; j < rows[i].size(); ++j)
						r.values(i, j) = rows[i][j];
				}
			} else {
				const auto m = read_matrix_csv(resolve(rj.at("matrix").get<std::string>()));
				const auto rp = positions(m.row_names, from, "rows", r.name);
				const auto cp = positions(m.col_names, to, "columns", r.name);
				r.values = Matrix(from.size(), to.size());
				for (std::size_t i = 0; i < rp.size(); ++i)
					for (std::size_t j = 0; j < cp.size(); ++j)
						r.values(rp[i], cp[j]) = m.values(i, j);
			}
			relations.push_back(std::move(r));
		}
		return build_network(std::move(levels), std::move(relations));
	} catch (const nlohmann::json::exception& e) {
		throw ValidationError(std::string("network spec: ") + e.what());
	}
}

MultilevelNetwork load_network(const fs::path& path) {
	std::ifstream in(path);
	if (!in)
		throw IoError("cannot read " + path.string());
	nlohmann::json spec;
	try {
		in >> spec;
	} catch (const nlohmann::json::exception& e) {
		throw ValidationError(path.string() + ": " + e.what());
	}
	return network_from_json(spec, path.parent_path());
}

nlohmann::json network_to_json(const MultilevelNetwork& network) {
	nlohmann::json j;
	j["levels"] = nlohmann::json::array();
	for (const auto& level : network.levels())
		j["levels"].push_back({{"name", level.name}, {"units", level.unit_names}});
	j["relations"] = nlohmann::json::array();
	for (const auto& r : network.relations()) {
		std::vector<std::vector<double>> rows(r.values.rows(), std::vector<double>(r.values.cols()));
		for (std::size_t i = 0; i < r.values.rows(); ++i)
			for (std::size_t k = 0; k < r.values.cols(); ++k)
				rows[i][k] = r.values(i, k);
		j["relations"].push_back({{"name", r.name},
		                          {"from", network.level(r.from_level).name},
		                          {"to", network.level(r.to_level).name},
		                          {"diagonal_defined", r.diagonal_defined},
		                          {"values", rows}});
	}
	return j;
}

void write_labels_csv(const fs::path& path, const std::vector<std::string>& units, const std::vector<int>& labels) {
	auto out = open_out(path);
	out << "unit,cluster\n";
	for (std::size_t i = 0; i < units.size(); ++i)
		out << quote(units[i]) << ',' << labels[i] + 1 << '\n';
	if (!out)
		throw IoError("failed writing " + path.string());
}

std::vector<int> read_labels_csv(const fs::path& path, const Level& level) {
	const auto rows = read_table(path);
	std::unordered_map<std::string, int> by_name;
	for (std::size_t i = 0; i < rows.size(); ++i) {
		if (rows[i].size() < 2)
			throw ValidationError(path.string() + ": row " + std::to_string(i + 1) + " needs unit,cluster");
		if (i == 0 && trim(rows[i][1]) == "cluster")
			continue;
		by_name[trim(rows[i][0])] = static_cast<int>(parse_number(rows[i][1], path)) - 1;
	}
	std::vector<int> labels;
	for (const auto& unit : level.unit_names) {
		auto it = by_name.find(unit);
		if (it == by_name.end())
			throw ValidationError(path.string() + ": no cluster for unit '" + unit + "'");
		labels.push_back(it->second);
	}
	if (by_name.size() != level.size())
		throw ValidationError(path.string() + ": names outside level '" + level.name + "'");
	return labels;
}

OrderedMatrix order_matrix(const MultilevelNetwork& network, std::size_t relation_id, const MultiPartition& partition) {
	require_feasible(partition, network);
	const auto& relation = network.relation(relation_id);
	auto order = [](const std::vector<int>& labels) {
		std::vector<std::size_t> idx(labels.size());
		std::iota(idx.begin(), idx.end(), 0);
		std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
		return idx;
	};
	const auto& rl = partition.labels[relation.from_level];
	const auto& cl = partition.labels[relation.to_level];
	OrderedMatrix out;
	out.row_order = order(rl);
	out.col_order = order(cl);
	out.values = Matrix(out.row_order.size(), out.col_order.size());
	for (std::size_t i = 0; i < out.row_order.size(); ++i) {
		out.row_clusters.push_back(rl[out.row_order[i]]);
		for (std::size_t j = 0; j < out.col_order.size(); ++j)
			out.values(i, j) = relation.values(out.row_order[i], out.col_order[j]);
	}
	for (auto j : out.col_order)
		out.col_clusters.push_back(cl[j]);
	return out;
}

OrderedMatrix emit_ordered_matrix(const MultilevelNetwork& network, std::size_t relation_id,
                                  const MultiPartition& partition, const fs::path& stem) {
	auto ordered = order_matrix(network, relation_id, partition);
	const auto& relation = network.relation(relation_id);
	const auto& rows = network.level(relation.from_level).unit_names;
	const auto& cols = network.level(relation.to_level).unit_names;

	fs::path csv = stem;
	csv += ".csv";
	{
		auto out = open_out(csv);
		out << "unit,cluster";
		for (auto j : ordered.col_order)
			out << ',' << quote(cols[j]);
		out << "\ncluster,";
		for (int c : ordered.col_clusters)
			out << ',' << c + 1;
		out << '\n';
		for (std::size_t i = 0; i < ordered.row_order.size(); ++i) {
			out << quote(rows[ordered.row_order[i]]) << ',' << ordered.row_clusters[i] + 1;
			for (std::size_t j = 0; j < ordered.col_order.size(); ++j)
				out << ',' << format_cell(ordered.values(i, j));
			out << '\n';
		}
		if (!out)
			throw IoError("failed writing " + csv.string());
	}

	const bool binary = std::all_of(relation.values.data().begin(), relation.values.data().end(),
	                                [](double v) { return v == 0.0 || v == 1.0; });
	std::ostringstream text;
	std::size_t width = 0;
	for (auto i : ordered.row_order)
		width = std::max(width, rows[i].size());
	auto separator = [&] {
		text << std::string(width + 1, ' ');
		for (std::size_t j = 0; j < ordered.col_order.size(); ++j) {
			if (j > 0 && ordered.col_clusters[j] != ordered.col_clusters[j - 1])
				text << '+';
			text << (binary ? "-" : "------");
		}
		text << '\n';
	};
	for (std::size_t i = 0; i < ordered.row_order.size(); ++i) {
		if (i > 0 && ordered.row_clusters[i] != ordered.row_clusters[i - 1])
			separator();
		const auto& name = rows[ordered.row_order[i]];
		text << name << std::string(width + 1 - name.size(), ' ');
		for (std::size_t j = 0; j < ordered.col_order.size(); ++j) {
			if (j > 0 && ordered.col_clusters[j] != ordered.col_clusters[j - 1])
				text << '|';
			const double v = ordered.values(i, j);
			const bool self = relation.one_mode() && ordered.row_order[i] == ordered.col_order[j] &&
			                  !relation.diagonal_defined;
			if (binary)
				text << (self ? '\\' : v != 0.0 ? '#' : '.');
			else if (self)
				text << "     \\";
			else
				text << std::setw(6) << std::fixed << std::setprecision(2) << v;
		}
		text << '\n';
	}
	fs::path txt = stem;
	txt += ".txt";
	write_text(txt, text.str());
	return ordered;
}

OrderedMatrixFile read_ordered_matrix_csv(const fs::path& path) {
	const auto rows = read_table(path);
	if (rows.size() < 2)
		throw ValidationError(path.string() + ": missing header rows");
	OrderedMatrixFile f;
	for (std::size_t j = 2; j < rows[0].size(); ++j)
		f.col_names.push_back(rows[0][j]);
	for (std::size_t j = 2; j < rows[1].size(); ++j)
		f.col_clusters.push_back(static_cast<int>(parse_number(rows[1][j], path)));
	f.values = Matrix(rows.size() - 2, f.col_names.size());
	for (std::size_t i = 2; i < rows.size(); ++i) {
		if (rows[i].size() != f.col_names.size() + 2)
			throw ValidationError(path.string() + ": ragged row " + std::to_string(i + 1));
		f.row_names.push_back(rows[i][0]);
		f.row_clusters.push_back(static_cast<int>(parse_number(rows[i][1], path)));
		for (std::size_t j = 2; j < rows[i].size(); ++j)
			f.values(i - 2, j - 2) = parse_number(rows[i][j], path);
	}
	return f;
}

AttributeProfile attribute_profile(const Level& level, const std::vector<int>& labels, int clusters,
                                   const fs::path& attributes) {
	const auto rows = read_table(attributes);
	if (rows.empty())
		throw ValidationError(attributes.string() + ": empty attribute table");
	AttributeProfile p;
	for (std::size_t j = 1; j < rows[0].size(); ++j)
		p.columns.push_back(trim(rows[0][j]));
	std::unordered_map<std::string, std::size_t> unit_index;
	for (std::size_t i = 0; i < level.size(); ++i)
		unit_index.emplace(level.unit_names[i], i);

	const auto m = static_cast<std::size_t>(clusters);
	const auto cols = p.columns.size();
	std::vector<std::vector<double>> sums(m, std::vector<double>(cols, 0.0));
	std::vector<std::vector<std::size_t>> counts(m, std::vector<std::size_t>(cols, 0));
	std::vector<double> all_sums(cols, 0.0);
	std::vector<std::size_t> all_counts(cols, 0);
	std::vector<bool> seen(level.size(), false);
	for (std::size_t r = 1; r < rows.size(); ++r) {
		const auto name = trim(rows[r][0]);
		auto it = unit_index.find(name);
		if (it == unit_index.end())
			throw ValidationError(attributes.string() + ": unknown unit '" + name + "'");
		seen[it->second] = true;
		const auto c = static_cast<std::size_t>(labels[it->second]);
		for (std::size_t j = 0; j < cols && j + 1 < rows[r].size(); ++j) {
			if (trim(rows[r][j + 1]).empty())
				continue;
			const double v = parse_number(rows[r][j + 1], attributes);
			sums[c][j] += v;
			++counts[c][j];
			all_sums[j] += v;
			++all_counts[j];
		}
	}
	for (std::size_t i = 0; i < level.size(); ++i)
		if (!seen[i])
			throw ValidationError(attributes.string() + ": no row for unit '" + level.unit_names[i] + "'");
	p.frequencies.assign(m, 0);
	for (int c : labels)
		++p.frequencies[static_cast<std::size_t>(c)];
	const double nan = std::nan("");
	for (std::size_t c = 0; c < m; ++c) {
		std::vector<double> means;
		for (std::size_t j = 0; j < cols; ++j)
			means.push_back(counts[c][j] ? sums[c][j] / static_cast<double>(counts[c][j]) : nan);
		p.cluster_means.push_back(std::move(means));
	}
	for (std::size_t j = 0; j < cols; ++j)
		p.overall_means.push_back(all_counts[j] ? all_sums[j] / static_cast<double>(all_counts[j]) : nan);
	return p;
}

void write_attribute_profile(const fs::path& path, const AttributeProfile& profile) {
	auto out = open_out(path);
	out << "cluster,frequency";
	for (const auto& c : profile.columns)
		out << ',' << quote(c);
	out << '\n';
	for (std::size_t c = 0; c < profile.cluster_means.size(); ++c) {
		out << c + 1 << ',' << profile.frequencies[c];
		for (double v : profile.cluster_means[c])
			out << ',' << format_cell(v);
		out << '\n';
	}
	out << "all," << std::accumulate(profile.frequencies.begin(), profile.frequencies.end(), std::size_t{0});
	for (double v : profile.overall_means)
		out << ',' << format_cell(v);
	out << '\n';
	if (!out)
		throw IoError("failed writing " + path.string());
}

nlohmann::json to_json(const AttributeProfile& profile) {
	auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
	nlohmann::json j;
	j["columns"] = profile.columns;
	j["frequencies"] = profile.frequencies;
	j["cluster_means"] = nlohmann::json::array();
	for (const auto& row : profile.cluster_means) {
		auto r = nlohmann::json::array();
		for (double v : row)
			r.push_back(num(v));
		j["cluster_means"].push_back(r);
	}
	j["overall_means"] = nlohmann::json::array();
	for (double v : profile.overall_means)
		j["overall_means"].push_back(num(v));
	return j;
}

void write_text(const fs::path& path, const std::string& text) {
	auto out = open_out(path);
	out << text;
	if (!out)
		throw IoError("failed writing " + path.string());
}

} // namespace mlbm
