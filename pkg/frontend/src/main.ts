/** Bootstrap: one annotation session per browser tab. */

import { agreementGuidance, agreementView } from "./agreement.js";
import { HttpAnnotationApi } from "./api.js";
import { AnnotationController } from "./controller.js";
import { renderAgreement, renderAgreementGuidance, renderSession } from "./dom.js";

function annotatorIdFromQuery(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("annotator") ?? "annotator-1";
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  const agreementRoot = document.getElementById("agreement");
  if (!root || !agreementRoot) return;

  const api = new HttpAnnotationApi("");
  const controller = new AnnotationController(api, annotatorIdFromQuery());
  controller.onChange((state) => renderSession(root, state));

  document.addEventListener("keydown", (event) => {
    if (event.metaKey || event.ctrlKey || event.altKey) return;
    void controller.handleKey(event.key);
  });

  await controller.start();

  const refreshAgreement = async () => {
    try {
      renderAgreement(agreementRoot, agreementView(await api.agreement()));
    } catch (err) {
      const guidance = agreementGuidance(err);
      if (guidance) renderAgreementGuidance(agreementRoot, guidance);
    }
  };
  document.getElementById("refresh-agreement")?.addEventListener("click", () => {
    void refreshAgreement();
  });
  void refreshAgreement();
}

void boot();
