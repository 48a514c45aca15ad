#ifndef GMTCOMP_H
#define GMTCOMP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Equilibrium regime under a minimum tax.
 */
typedef enum GmtcRegime {
  GMTC_REGIME_BINDING = 0,
  GMTC_REGIME_SMALL_UNDERCUTS = 1,
  GMTC_REGIME_BOTH_UNDERCUT = 2,
  GMTC_REGIME_TIE = 3,
  GMTC_REGIME_HAVEN_CONTINUUM = 4,
} GmtcRegime;

/**
 * Result of a C API call.
 */
typedef enum GmtcStatus {
  GMTC_STATUS_OK = 0,
  /**
   * Inputs violate a model invariant or lie outside an admissible band.
   */
  GMTC_STATUS_VALIDATION = 1,
  /**
   * A root finder or fixed-point iteration failed.
   */
  GMTC_STATUS_NUMERIC = 2,
  /**
   * A required pointer argument was null.
   */
  GMTC_STATUS_NULL_POINTER = 10,
  /**
   * The library panicked; the handle arguments are unchanged.
   */
  GMTC_STATUS_PANIC = 11,
} GmtcStatus;

/**
 * Opaque capital-model economy.
 */
typedef struct GmtcEconomy GmtcEconomy;

/**
 * Opaque labor-model economy.
 */
typedef struct GmtcLaborEconomy GmtcLaborEconomy;

/**
 * Equilibrium without a minimum tax.
 */
typedef struct GmtcPreEquilibrium {
  double t1;
  double t2;
  double k1;
  double k2;
  /**
   * Profit shifted into country 2.
   */
  double g;
  double revenue1;
  double revenue2;
} GmtcPreEquilibrium;

/**
 * Equilibrium under a minimum tax. For the haven continuum the rates are a
 * representative member of the equilibrium set.
 */
typedef struct GmtcGmtEquilibrium {
  enum GmtcRegime regime;
  double t1;
  double t2;
  double k1;
  double k2;
  double g;
  double revenue1;
  double revenue2;
} GmtcGmtEquilibrium;

/**
 * Rate thresholds of an economy.
 */
typedef struct GmtcThresholds {
  /**
   * Rate above which country 1 would attract more capital by undercutting.
   */
  double investment_threshold1;
  double investment_threshold2;
  double revenue_peak_rate;
  double revenue_peak;
  double undercut_crossover_rate;
  double alpha2_critical;
} GmtcThresholds;

/**
 * Labor-model equilibrium, with or without a minimum tax.
 */
typedef struct GmtcLaborEquilibrium {
  /**
   * `Binding` when no minimum tax applies.
   */
  enum GmtcRegime regime;
  double t1;
  double t2;
  double k1;
  double k2;
  double w1;
  double w2;
  double g;
  double revenue1;
  double revenue2;
} GmtcLaborEquilibrium;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next call on the same thread.
 */
const char *gmtc_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *gmtc_version(void);

/**
 * Validates the parameters and creates an economy handle.
 */
enum GmtcStatus gmtc_economy_new(double alpha1,
                                 double alpha2,
                                 double r,
                                 double mu,
                                 double delta,
                                 struct GmtcEconomy **out);

/**
 * Releases an economy handle. Null is ignored.
 *
 * # Safety
 * `econ` must be null or a handle from [`gmtc_economy_new`] not yet freed.
 */
void gmtc_economy_free(struct GmtcEconomy *econ);

/**
 * Equilibrium without a minimum tax.
 *
 * # Safety
 * `econ` must be a live handle and `out` valid for writes.
 */
enum GmtcStatus gmtc_nash_no_gmt(const struct GmtcEconomy *econ, struct GmtcPreEquilibrium *out);

/**
 * Long-run equilibrium under minimum rate `t_m` and carve-out rate `sigma`.
 *
 * # Safety
 * `econ` must be a live handle and `out` valid for writes.
 */
enum GmtcStatus gmtc_nash_gmt(const struct GmtcEconomy *econ,
                              double t_m,
                              double sigma,
                              struct GmtcGmtEquilibrium *out);

/**
 * Investment thresholds and revenue limits.
 *
 * # Safety
 * `econ` must be a live handle and `out` valid for writes.
 */
enum GmtcStatus gmtc_thresholds(const struct GmtcEconomy *econ, struct GmtcThresholds *out);

/**
 * Validates the parameters and creates a labor economy handle.
 */
enum GmtcStatus gmtc_labor_economy_new(double lambda,
                                       double beta,
                                       double lbar1,
                                       double lbar2,
                                       double r,
                                       double mu,
                                       double delta,
                                       struct GmtcLaborEconomy **out);

/**
 * Releases a labor economy handle. Null is ignored.
 *
 * # Safety
 * `econ` must be null or a handle from [`gmtc_labor_economy_new`] not yet freed.
 */
void gmtc_labor_economy_free(struct GmtcLaborEconomy *econ);

/**
 * Labor-model equilibrium without a minimum tax.
 *
 * # Safety
 * `econ` must be a live handle and `out` valid for writes.
 */
enum GmtcStatus gmtc_labor_nash_no_gmt(const struct GmtcLaborEconomy *econ,
                                       struct GmtcLaborEquilibrium *out);

/**
 * Labor-model equilibrium under a minimum tax.
 *
 * # Safety
 * `econ` must be a live handle and `out` valid for writes.
 */
enum GmtcStatus gmtc_labor_nash_gmt(const struct GmtcLaborEconomy *econ,
                                    double t_m,
                                    double sigma,
                                    struct GmtcLaborEquilibrium *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GMTCOMP_H */
