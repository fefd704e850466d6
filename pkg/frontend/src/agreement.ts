/**
 * View model for the inter-annotator agreement screen: kappa rendered
 * to three decimals plus a sortable disagreement table.
 */

import { ApiError } from "./api.js";
import type { AgreementReport } from "./api.js";

export interface DisagreementRow {
  candidateId: number;
  labels: [string, string];
}

export interface AgreementView {
  kappaText: string;
  annotators: [string, string];
  overlap: number;
  rows: DisagreementRow[];
}

export function formatKappa(kappa: number): string {
  return kappa.toFixed(3);
}

export function agreementView(report: AgreementReport): AgreementView {
  const [a, b] = report.annotators;
  const rows = report.disagreements.map((d) => ({
    candidateId: d.candidate_id,
    labels: [d.labels[a] ?? "", d.labels[b] ?? ""] as [string, string],
  }));
  return {
    kappaText: formatKappa(report.kappa),
    annotators: [a, b],
    overlap: report.n_overlap,
    rows: sortRows(rows, "candidateId", "asc"),
  };
}

export type SortKey = "candidateId" | "labels";

export function sortRows(
  rows: DisagreementRow[],
  key: SortKey,
  direction: "asc" | "desc",
): DisagreementRow[] {
  const sorted = [...rows].sort((x, y) => {
    const vx = key === "candidateId" ? x.candidateId : x.labels.join("/");
    const vy = key === "candidateId" ? y.candidateId : y.labels.join("/");
    if (vx < vy) return -1;
    if (vx > vy) return 1;
    return 0;
  });
  return direction === "desc" ? sorted.reverse() : sorted;
}

/** Human guidance when the service cannot compute agreement yet. */
export function agreementGuidance(error: unknown): string | null {
  if (error instanceof ApiError && error.status === 409) {
    return (
      "Agreement needs two annotators with at least one shared labeled " +
      "pair. Open a second session under a different annotator id and " +
      "label some of the same candidates."
    );
  }
  return null;
}
