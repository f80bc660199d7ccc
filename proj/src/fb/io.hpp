#pragma once

#include <string>
#include <vector>

#include "fb/density.hpp"
#include "fb/ffmg.hpp"
#include "fb/mesh.hpp"
#include "fb/optics.hpp"
#include "fb/validate.hpp"

namespace fb::io {

// All writers emit ASCII with '\n' line endings and 17 significant digits,
// which round-trips binary64 exactly; identical inputs give byte-identical
// files.

void write_mesh_obj(const TriangleMesh& mesh, const std::string& path);
TriangleMesh read_mesh_obj(const std::string& path);
void write_mesh_ply(const TriangleMesh& mesh, const std::string& path);

std::vector<Vec3> read_points_xyz(const std::string& path);
void write_points_xyz(const std::vector<Vec3>& points, const std::string& path);

// Header: ix,ox,oy,oz,dx,dy,dz,hx,hy,hz,rx,ry,rz,y
void write_trace_csv(const std::vector<optics::TraceRecord>& records, const std::string& path);
std::vector<optics::TraceRecord> read_trace_csv(const std::string& path);

// Nonzero cells as i,j,k,count plus a JSON sidecar carrying the grid spec and
// the ray total.
void write_grid_csv(const density::DensityGrid& grid, const std::string& path);
void write_grid_json(const density::DensityGrid& grid, const std::string& path);

// Header: iter,max_disp,avg_edge,volume,n_snapped,pressure,
//         tp_px,tp_py,tp_pz,tp_ex,tp_ey,tp_ez,tp_x,tp_y,tp_z
void write_metrics_csv(const ffmg::MetricsLog& log, const std::string& path);

void write_report_json(const validate::ValidationReport& report, const std::string& path);

// Analytic cross-check table: y,z_numeric,z_analytic,aberration_analytic,f_eff.
void write_analytic_csv(const optics::SphericalMirror& mirror, const std::vector<double>& heights,
                        const std::string& path);

} // namespace fb::io
