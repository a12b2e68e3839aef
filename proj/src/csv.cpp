#include "dpf/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dpf/errors.hpp"

namespace dpf::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string int_text(long v) { return std::to_string(v); }

}  // namespace

std::string truth_csv(const Truth& truth) {
  std::string out = "step,x,y,dx,dy,b\n";
  for (std::size_t k = 0; k < truth.observations.size(); ++k) {
    const ShipState& st = truth.trajectory[k + 1];
    out += int_text(static_cast<long>(k) + 1) + ',' + format_double(st.x) + ',' +
           format_double(st.y) + ',' + format_double(st.dx) + ',' + format_double(st.dy) +
           ',' + format_double(truth.observations[k].b) + '\n';
  }
  return out;
}

std::string filter_csv(const FilterOutput& out, const Truth& truth) {
  if (out.estimates.size() != truth.observations.size())
    throw InvalidInput("filter_csv: estimate and truth lengths differ");
  std::string text = "step,est_x,est_y,truth_x,truth_y,err_x,err_y\n";
  for (std::size_t k = 0; k < out.estimates.size(); ++k) {
    const Vec2& est = out.estimates[k];
    const ShipState& st = truth.trajectory[k + 1];
    text += int_text(static_cast<long>(k) + 1) + ',' + format_double(est.x) + ',' +
            format_double(est.y) + ',' + format_double(st.x) + ',' + format_double(st.y) +
            ',' + format_double(est.x - st.x) + ',' + format_double(est.y - st.y) + '\n';
  }
  return text;
}

std::string particles_csv(const FilterOutput& out) {
  std::string text = "step,particle,x,y,phase\n";
  for (std::size_t k = 0; k < out.particle_dump.size(); ++k)
    for (std::size_t i = 0; i < out.particle_dump[k].size(); ++i) {
      const ParticleSnapshot& snap = out.particle_dump[k][i];
      text += int_text(static_cast<long>(k) + 1) + ',' + int_text(static_cast<long>(i)) +
              ',' + format_double(snap.x) + ',' + format_double(snap.y) + ',' +
              format_double(snap.phase_accum) + '\n';
    }
  return text;
}

std::string table1_csv(const IntrinsicTable& table) {
  std::string text = "step,sd_x,sd_y,accepted\n";
  for (const IntrinsicRow& row : table.rows)
    text += int_text(row.step) + ',' + format_double(row.sd_x) + ',' +
            format_double(row.sd_y) + ',' + int_text(table.accepted) + '\n';
  return text;
}

std::string table2_csv(const RunStats& stats) {
  std::string text = "step,mean_x,sd_x,mean_y,sd_y,runs,particles\n";
  for (const CheckpointStats& row : stats.checkpoints) {
    text += int_text(row.step) + ',' + format_double(row.mean_x) + ',';
    if (row.sd_x) text += format_double(*row.sd_x);
    text += ',' + format_double(row.mean_y) + ',';
    if (row.sd_y) text += format_double(*row.sd_y);
    text += ',' + int_text(stats.runs) + ',' + int_text(stats.particles) + '\n';
  }
  return text;
}

std::string table3_csv(std::span<const SigmaScanRow> rows) {
  std::string text = "ratio,mean_D,se_D,runs,failures\n";
  for (const SigmaScanRow& row : rows)
    text += format_double(row.ratio) + ',' + format_double(row.mean_D) + ',' +
            format_double(row.se_D) + ',' + int_text(row.runs) + ',' +
            int_text(row.failures) + '\n';
  return text;
}

std::string fig1_csv(const RobustnessResult& result) {
  std::string text = "series,step,x,y\n";
  for (const TrajectorySeries& series : result.series)
    for (std::size_t step = 0; step < series.points.size(); ++step)
      text += series.name + ',' + int_text(static_cast<long>(step)) + ',' +
              format_double(series.points[step].x) + ',' +
              format_double(series.points[step].y) + '\n';
  return text;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FilterError("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw FilterError("failed writing " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FilterError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::vector<std::string>> parse(const std::string& content) {
  std::vector<std::vector<std::string>> rows;
  std::string field;
  std::vector<std::string> row;
  for (char c : content) {
    if (c == ',') {
      row.push_back(field);
      field.clear();
    } else if (c == '\n') {
      row.push_back(field);
      field.clear();
      rows.push_back(row);
      row.clear();
    } else {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dpf::csv
