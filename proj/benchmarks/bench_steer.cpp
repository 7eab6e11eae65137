// Microbenchmarks for the hot paths: field synthesis, reduction, the three
// solvers and the noise draw. Shared fixtures are built once and reused.
#include <benchmark/benchmark.h>

#include "steer/geometry.hpp"
#include "steer/leadfield.hpp"
#include "steer/search.hpp"
#include "steer/solvers.hpp"

namespace {

using namespace steer;

const LeadField& low_field(LeadModel model) {
  static const LeadField eight = synthesize_leadfield(build_geometry(LeadModel::contacts8), make_low_grid());
  static const LeadField forty = synthesize_leadfield(build_geometry(LeadModel::contacts40), make_low_grid());
  return model == LeadModel::contacts8 ? eight : forty;
}

const LeadField& high_field(LeadModel model) {
  static const LeadField eight = synthesize_leadfield(build_geometry(LeadModel::contacts8), make_high_grid());
  static const LeadField forty = synthesize_leadfield(build_geometry(LeadModel::contacts40), make_high_grid());
  return model == LeadModel::contacts8 ? eight : forty;
}

TargetSpec central_target(const LeadField& field) {
  TargetSpec target;
  target.position = field.grid.positions[attenuation_set(field, 1.0).member_positions.front()];
  target.orientation = Vec3::UnitZ();
  target.alignment = Alignment::parallel;
  target.magnitude = 0.05;
  target.id = "bench";
  return target;
}

const ReducedSystem& reduced(LeadModel model, GridResolution resolution) {
  static const ReducedSystem low8 = reduce_system(low_field(LeadModel::contacts8),
                                                  central_target(low_field(LeadModel::contacts8)));
  static const ReducedSystem low40 = reduce_system(low_field(LeadModel::contacts40),
                                                   central_target(low_field(LeadModel::contacts40)));
  static const ReducedSystem high8 = reduce_system(high_field(LeadModel::contacts8),
                                                   central_target(high_field(LeadModel::contacts8)));
  if (resolution == GridResolution::high) return high8;
  return model == LeadModel::contacts8 ? low8 : low40;
}

void BM_synthesize_low(benchmark::State& state) {
  const ContactArray contacts = build_geometry(LeadModel::contacts8);
  const DofGrid grid = make_low_grid();
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_leadfield(contacts, grid));
}
BENCHMARK(BM_synthesize_low);

void BM_synthesize_high(benchmark::State& state) {
  const ContactArray contacts = build_geometry(LeadModel::contacts8);
  const DofGrid grid = make_high_grid();
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_leadfield(contacts, grid));
}
BENCHMARK(BM_synthesize_high);

void BM_reduce_high(benchmark::State& state) {
  const LeadField& field = high_field(LeadModel::contacts8);
  const TargetSpec target = central_target(field);
  for (auto _ : state) benchmark::DoNotOptimize(reduce_system(field, target));
}
BENCHMARK(BM_reduce_high);

void BM_add_noise_high(benchmark::State& state) {
  const LeadField& field = high_field(LeadModel::contacts8);
  NoiseSpec spec;
  spec.psnr_db = 40.0;
  spec.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(add_noise(field, spec));
    ++spec.realization_index;
  }
}
BENCHMARK(BM_add_noise_high);

void BM_rp_low40(benchmark::State& state) {
  const ReducedSystem& system = reduced(LeadModel::contacts40, GridResolution::low);
  for (auto _ : state) benchmark::DoNotOptimize(solve_rp(system));
}
BENCHMARK(BM_rp_low40);

void BM_tls_high8(benchmark::State& state) {
  const TlsOperator ridge(reduced(LeadModel::contacts8, GridResolution::high));
  for (auto _ : state) benchmark::DoNotOptimize(ridge.solve(1e-7, 1.0));
}
BENCHMARK(BM_tls_high8);

void BM_l1l1_low8(benchmark::State& state) {
  L1l1Operator censored(reduced(LeadModel::contacts8, GridResolution::low));
  for (auto _ : state) benchmark::DoNotOptimize(censored.solve(1e-4, 1e-3));
}
BENCHMARK(BM_l1l1_low8);

void BM_l1l1_low40(benchmark::State& state) {
  L1l1Operator censored(reduced(LeadModel::contacts40, GridResolution::low));
  for (auto _ : state) benchmark::DoNotOptimize(censored.solve(1e-4, 1e-3));
}
BENCHMARK(BM_l1l1_low40);

void BM_attenuation_high(benchmark::State& state) {
  const LeadField& field = high_field(LeadModel::contacts8);
  for (auto _ : state) benchmark::DoNotOptimize(attenuation_set(field, 0.1));
}
BENCHMARK(BM_attenuation_high);

}  // namespace

BENCHMARK_MAIN();
