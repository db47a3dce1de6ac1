#include <stdio.h>
#include <string.h>

#include "kgabduct/kgabduct.h"

int main(void) {
  kga_graph* g = NULL;
  kga_status s = kga_graph_open("/nonexistent", &g);
  if (s == KGA_OK || g != NULL) return 1;
  if (strcmp(kga_status_name(s), "io") != 0) {
    fprintf(stderr, "unexpected status %s: %s\n", kga_status_name(s), kga_last_error());
    return 1;
  }
  return 0;
}
