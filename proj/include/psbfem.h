#ifndef PSBFEM_H
#define PSBFEM_H

/* C interface to the polygon scaled-boundary seepage solver.
 *
 * All functions return psb_status; on any failure psb_last_error() carries a
 * human-readable message for the calling thread. Objects are opaque and must
 * be released with their matching *_free. Strings returned through char**
 * outputs are owned by the caller and released with psb_string_free.
 */

#ifdef __cplusplus
extern "C" {
#endif

#ifndef PSBFEM_API
#define PSBFEM_API __attribute__((visibility("default")))
#endif

#define PSBFEM_VERSION "1.0.0"

typedef enum psb_status {
    PSB_OK = 0,
    PSB_ERR_INVALID_ARGUMENT = 1,
    PSB_ERR_PARSE = 2,
    PSB_ERR_MODEL = 3,
    PSB_ERR_GEOMETRY = 4,
    PSB_ERR_ELEMENT = 5,
    PSB_ERR_SOLVER = 6,
    PSB_ERR_VERIFY = 7,
    PSB_ERR_IO = 8,
    PSB_ERR_INTERNAL = 9
} psb_status;

typedef struct psb_model psb_model;
typedef struct psb_solution psb_solution;

PSBFEM_API const char* psb_version(void);

/* Message of the most recent failure on this thread; "" when none. The
 * pointer stays valid until the next failing call on the same thread. */
PSBFEM_API const char* psb_last_error(void);

/* --- models ------------------------------------------------------------ */

/* Parse the native JSON model format (see docs/model_format.md). */
PSBFEM_API psb_status psb_model_parse(const char* text, psb_model** out);

/* Parse an input deck (see docs/deck_format.md). overlay_json optionally
 * supplies what a deck cannot express, as a JSON object with any of the
 * native-format keys "boundary_conditions", "schedules", "transient",
 * "monitors", "unit_note", plus "Ss" (applied to every material). Pass NULL
 * for a bare mesh-and-materials model. out_warnings (optional) receives the
 * deck's warning diagnostics, one "line N: message" per line, or NULL when
 * there are none. */
PSBFEM_API psb_status psb_model_parse_deck(const char* deck_text, const char* overlay_json,
                                           psb_model** out, char** out_warnings);

/* Read a model file; .inp parses as a deck (no overlay), anything else as
 * the native format. */
PSBFEM_API psb_status psb_model_read_file(const char* path, psb_model** out);

/* Serialize to the native format in fully resolved form. */
PSBFEM_API psb_status psb_model_serialize(const psb_model* model, char** out_text);

PSBFEM_API psb_status psb_model_info(const psb_model* model, int* n_nodes, int* n_elements,
                                     int* has_transient, int* n_monitors);

/* Replace dt / t_end of the transient block; pass a value <= 0 to keep the
 * stored one. Fails on models without a transient block. */
PSBFEM_API psb_status psb_model_override_transient(psb_model* model, double dt, double t_end);

PSBFEM_API psb_status psb_model_clear_monitors(psb_model* model);
PSBFEM_API psb_status psb_model_add_monitor(psb_model* model, const char* name, double x,
                                            double y);

/* Mesh-only VTK preview (no point data). */
PSBFEM_API psb_status psb_model_export_vtk(const psb_model* model, const char* path);

PSBFEM_API void psb_model_free(psb_model* model);

/* --- solving ------------------------------------------------------------ */

/* Steady solve; the solution holds one step at t = 0. */
PSBFEM_API psb_status psb_solve_steady(const psb_model* model, psb_solution** out);

/* Transient run per the model's transient block (plus overrides); step 0 of
 * the solution is the initial state. */
PSBFEM_API psb_status psb_solve_transient(const psb_model* model, psb_solution** out);

PSBFEM_API psb_status psb_solution_n_steps(const psb_solution* sol, int* out);
PSBFEM_API psb_status psb_solution_time(const psb_solution* sol, int step, double* out);

/* Borrowed pointer to the nodal heads of one step (dof order = ascending
 * node id); valid while the solution lives. */
PSBFEM_API psb_status psb_solution_heads(const psb_solution* sol, int step, const double** data,
                                         int* len);

/* Head at an arbitrary interior point through the semi-analytic element
 * solution. */
PSBFEM_API psb_status psb_solution_sample(const psb_solution* sol, int step, double x, double y,
                                          double* head);

/* Legacy-format VTK of one step: nodal head field plus cell-centered flux. */
PSBFEM_API psb_status psb_solution_export_vtk(const psb_solution* sol, int step,
                                              const char* path);

/* CSV of the model's monitor points over all steps ("t,name,..." header). */
PSBFEM_API psb_status psb_solution_monitor_csv(const psb_solution* sol, char** out_csv);

/* JSON snapshot {"times": [...], "heads": [[...], ...]} and its inverse;
 * loading recomputes element operators from the model. */
PSBFEM_API psb_status psb_solution_save(const psb_solution* sol, char** out_json);
PSBFEM_API psb_status psb_solution_load(const psb_model* model, const char* json_text,
                                        psb_solution** out);

PSBFEM_API void psb_solution_free(psb_solution* sol);

/* --- verification ------------------------------------------------------- */

/* Run one named verification suite ("patch", "element", "convergence",
 * "fem-compare", "inclusion", "transient-oracle", "transient-fem",
 * "parser"). *pass is 1/0; out_text (optional) receives the report,
 * out_csv (optional) its table. A failing suite still returns PSB_OK. */
PSBFEM_API psb_status psb_run_suite(const char* name, int* pass, char** out_text,
                                    char** out_csv);

/* Comma-separated list of suite names. */
PSBFEM_API psb_status psb_suite_names(char** out);

PSBFEM_API void psb_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* PSBFEM_H */
