/* Copyright Contributors to the voldis Project
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the voldis volumetric disentanglement engine.
 *
 * All entry points return vd_status; on failure vd_last_error() carries a
 * descriptive message for the calling thread. Configuration is passed as a
 * JSON document (possibly partial); unknown keys are rejected. Handles are
 * opaque and freed with their _close function.
 */

#ifndef VOLDIS_VOLDIS_H
#define VOLDIS_VOLDIS_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vd_status {
  VD_OK = 0,
  VD_ERR_INPUT = 1,  /* bad arguments, missing files, malformed configs */
  VD_ERR_NUMERIC = 2 /* non-finite state (NaN); the run was aborted */
} vd_status;

const char* vd_version(void);

/* Message from the most recent failing call on this thread. */
const char* vd_last_error(void);

typedef struct vd_dataset vd_dataset;
typedef struct vd_fields vd_fields; /* a coarse/fine field pair + optimizer state */

/* Synthesizes a posed dataset (images, masks, poses, oracle renders) from the
 * analytic scene described by config "generate" and writes it to out_dir. */
vd_status vd_generate(const char* config_json, const char* out_dir);

vd_status vd_dataset_open(const char* dir, vd_dataset** out);
void vd_dataset_close(vd_dataset* dataset);
int vd_dataset_view_count(const vd_dataset* dataset);
void vd_dataset_resolution(const vd_dataset* dataset, int* width, int* height);

/* Fresh fields per config "field"; open/save use a checkpoint directory
 * holding coarse.vdsf / fine.vdsf plus Adam sidecars. */
vd_status vd_fields_create(const char* config_json, vd_fields** out);
vd_status vd_fields_open(const char* checkpoint_dir, vd_fields** out);
vd_status vd_fields_save(const vd_fields* fields, const char* checkpoint_dir);
void vd_fields_close(vd_fields* fields);

/* Fits the pair against the dataset with the loss selected by
 * config train.target ("full" or "background"). Writes config.json,
 * metrics.csv and checkpoints/ under run_dir. */
vd_status vd_fit(vd_fields* fields, const vd_dataset* dataset,
                 const char* config_json, const char* run_dir);

/* Renders dataset view view_index at the dataset resolution into out_dir.
 * When out_psnr is non-null it receives the PSNR against the dataset image. */
vd_status vd_render_view(const vd_fields* fields, const vd_dataset* dataset,
                         int view_index, const char* config_json,
                         const char* out_dir, double* out_psnr);

/* Foreground extraction and recombination for dataset views (view_index < 0
 * means every view). Writes foreground and composite renders. */
vd_status vd_extract(const vd_fields* full, const vd_fields* background,
                     const vd_dataset* dataset, const char* config_json,
                     int view_index, const char* out_dir);

/* Background volume rendered in isolation (object removal). */
vd_status vd_remove(const vd_fields* background, const vd_dataset* dataset,
                    const char* config_json, int view_index, const char* out_dir);

/* Similarity-transformed (or focal-scaled) foreground recombined over the
 * background, per config "transform". */
vd_status vd_transform(const vd_fields* full, const vd_fields* background,
                       const vd_dataset* dataset, const char* config_json,
                       int view_index, const char* out_dir);

/* Optimizes replacement foreground colors toward the background (Eq. of the
 * camouflage task); foreground weights stay frozen. */
vd_status vd_camouflage(const vd_fields* full, const vd_fields* background,
                        const vd_dataset* dataset, const char* config_json,
                        const char* run_dir);

/* Learns the nonnegative residual volume approximating object removal under
 * an additive-light constraint. */
vd_status vd_nonneg(const vd_fields* full, const vd_fields* background,
                    const vd_dataset* dataset, const char* config_json,
                    const char* run_dir);

/* Masked semantic manipulation driven by the built-in scorer. target is a
 * color name or a path to a reference image. */
vd_status vd_semantic(const vd_fields* full, const vd_fields* background,
                      const vd_dataset* dataset, const char* target,
                      const char* config_json, const char* run_dir);

/* Renders metric curves and a text summary from <run_dir>/metrics.csv. */
vd_status vd_report(const char* run_dir);

#ifdef __cplusplus
}
#endif

#endif /* VOLDIS_VOLDIS_H */
