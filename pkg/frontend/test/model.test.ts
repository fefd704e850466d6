import { describe, expect, it } from "vitest";

import { countsConsistent, initialState, maskEmail, toPairCard } from "../src/model.js";
import { makeCandidate } from "./fake-service.js";

describe("pair card view model", () => {
  it("renders fully with every optional developer field absent", () => {
    const card = toPairCard(
      makeCandidate(7, 0.42, {
        developer: { dev_id: "D7", username: "dev7", display_name: null, email: null },
        author: { author_id: "A7", display_name: "Ada Author", position: null },
      }),
    );
    expect(card.devDisplayName).toBe("—");
    expect(card.emailMasked).toBe("—");
    expect(card.emailFull).toBeNull();
    expect(card.authorPosition).toBe("—");
    expect(card.username).toBe("dev7");
  });

  it("masks emails to the local-part initial plus domain", () => {
    expect(maskEmail("jane.doe@lab.example.org")).toBe("j…@lab.example.org");
    expect(maskEmail(null)).toBe("—");
    expect(maskEmail("@broken")).toBe("—");
  });

  it("keeps counts consistent with the queue size", () => {
    const state = initialState("ann1");
    state.queueSize = 10;
    state.labeled = 4;
    state.remaining = 6;
    expect(countsConsistent(state)).toBe(true);
    state.remaining = 5;
    expect(countsConsistent(state)).toBe(false);
  });
});
