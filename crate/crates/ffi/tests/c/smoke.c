#include <math.h>
#include <stdio.h>
#include <string.h>

#include "analyticity_lab.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      const char *e = lab_last_error();                               \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, e ? e : ""); \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  size_t shape[2] = {5, 4};
  double origin[2] = {0.0, 0.0};
  double values[20];
  for (int i = 0; i < 20; i++) values[i] = (double)(i % 4) * 0.25 * (1.0 + i / 4);

  LabField *u = NULL, *e = NULL, *back = NULL;
  CHECK(lab_field_new(2, shape, origin, 0.25, true, 1, values, 20, &u) == LAB_STATUS_OK);
  CHECK(lab_extend(u, LAB_MODE_DIRICHLET, &e) == LAB_STATUS_OK);
  size_t nodes = 0, comps = 0, dim = 0;
  CHECK(lab_field_info(e, &nodes, &comps, &dim) == LAB_STATUS_OK);
  CHECK(nodes == 35 && comps == 1 && dim == 2);
  CHECK(lab_restrict(e, u, &back) == LAB_STATUS_OK);
  double got[20];
  CHECK(lab_field_values(back, got, 20) == LAB_STATUS_OK);
  CHECK(memcmp(got, values, sizeof got) == 0);

  double small[3];
  CHECK(lab_field_values(back, small, 3) == LAB_STATUS_INVALID_ARGUMENT);
  CHECK(lab_last_error() != NULL);
  CHECK(lab_field_read("/no/such/file.field", &e) == LAB_STATUS_IO);

  double x[2] = {0.0, 0.5}, y[2] = {0.0, 0.5}, v = 0.0;
  CHECK(lab_kernel_eval("Gamma", 0, 0, 0, 1.0, x, y, 2, 0, 0, &v) == LAB_STATUS_OK);
  CHECK(fabs(v - 1.0 / (4.0 * M_PI)) < 1e-14);
  CHECK(lab_kernel_eval("Bogus", 0, 0, 0, 1.0, x, y, 2, 0, 0, &v) != LAB_STATUS_OK);

  lab_field_free(u);
  lab_field_free(e);
  lab_field_free(back);
  lab_field_free(NULL);
  printf("ok %s\n", lab_version());
  return 0;
}
