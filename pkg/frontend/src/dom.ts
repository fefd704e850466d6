/** Thin DOM layer: renders SessionState and the agreement view. */

import type { AgreementView } from "./agreement.js";
import type { SessionState } from "./model.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderSession(root: HTMLElement, state: SessionState): void {
  root.replaceChildren();

  if (state.offline) {
    root.appendChild(el("div", "banner offline", "Offline — check the service and retry."));
  }
  if (state.error) {
    root.appendChild(el("div", "banner error", state.error));
  }

  const counts = el(
    "div",
    "counts",
    `${state.labeled} labeled · ${state.remaining} remaining`,
  );
  root.appendChild(counts);

  if (state.done) {
    const doneBox = el("div", "done");
    doneBox.appendChild(el("h2", "", "Session complete"));
    doneBox.appendChild(
      el("p", "", `${state.labeled} of ${state.queueSize} pairs labeled.`),
    );
    root.appendChild(doneBox);
    return;
  }
  const card = state.card;
  if (!card) {
    root.appendChild(el("p", "empty", "No candidate to show."));
    return;
  }

  const box = el("div", "card");
  box.appendChild(el("h2", "title", card.articleTitle));
  const author = el("div", "author");
  author.appendChild(el("span", "name", card.authorName));
  author.appendChild(el("span", "position", ` (${card.authorPosition} author)`));
  box.appendChild(author);

  const dev = el("div", "developer");
  dev.appendChild(el("span", "username", card.username));
  dev.appendChild(el("span", "devname", ` · ${card.devDisplayName}`));
  const email = el(
    "span",
    "email",
    ` · ${state.emailRevealed ? card.emailFull ?? "—" : card.emailMasked}`,
  );
  email.title = "press e to reveal";
  dev.appendChild(email);
  box.appendChild(dev);

  box.appendChild(
    el("div", "similarity", `similarity ${card.similarity.toFixed(2)}`),
  );
  box.appendChild(
    el(
      "div",
      "help",
      "m match · n non-match · u unclear · e reveal email · z amend last",
    ),
  );
  if (state.amendPending) {
    box.appendChild(el("div", "banner amend", "Amending previous decision — press m/n/u."));
  }
  root.appendChild(box);
}

export function renderAgreement(root: HTMLElement, view: AgreementView): void {
  root.replaceChildren();
  root.appendChild(el("h2", "", `Cohen's kappa: ${view.kappaText}`));
  root.appendChild(
    el("p", "", `${view.annotators[0]} vs ${view.annotators[1]} on ${view.overlap} pairs`),
  );
  const table = el("table", "disagreements");
  const head = el("tr", "");
  head.appendChild(el("th", "", "candidate"));
  head.appendChild(el("th", "", view.annotators[0]));
  head.appendChild(el("th", "", view.annotators[1]));
  table.appendChild(head);
  for (const row of view.rows) {
    const tr = el("tr", "");
    tr.appendChild(el("td", "", String(row.candidateId)));
    tr.appendChild(el("td", "", row.labels[0]));
    tr.appendChild(el("td", "", row.labels[1]));
    table.appendChild(tr);
  }
  root.appendChild(table);
}

export function renderAgreementGuidance(root: HTMLElement, text: string): void {
  root.replaceChildren();
  root.appendChild(el("p", "guidance", text));
}
