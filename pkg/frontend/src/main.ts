/** DOM wiring for the probe tool.
 *
 * Click on the scene to draw a track, submit it for scoring, inspect the
 * verdicts and the worst primitive pair, and use the previous verdict to
 * decide the next probe. Submissions are serialized: one in flight at a
 * time.
 */

import { ProbeClient, ServiceUnreachable, TrackTooShort } from "./api.js";
import {
  drawCanonization,
  drawPolyline,
  drawVocabulary,
  drawWorstPair,
  scoreboard,
} from "./overlay.js";
import { ProbeSession } from "./session.js";
import type { ProbeRecord } from "./session.js";
import type { VocabPrimitive } from "./types.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ??
  "http://127.0.0.1:8080";

const client = new ProbeClient(SERVICE_URL);
const session = new ProbeSession();

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const banner = document.getElementById("banner")!;
const verdicts = document.getElementById("verdicts")!;
const historyList = document.getElementById("history")!;
const submitButton = document.getElementById("submit") as HTMLButtonElement;
const clearButton = document.getElementById("clear") as HTMLButtonElement;

let vocabulary: VocabPrimitive[] = [];
let sceneImage: HTMLImageElement | null = null;
let lastRecord: ProbeRecord | null = null;
let inFlight = false;

function showBanner(text: string): void {
  banner.textContent = text;
  banner.classList.remove("hidden");
}

function hideBanner(): void {
  banner.classList.add("hidden");
}

function redraw(): void {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (sceneImage) ctx.drawImage(sceneImage, 0, 0);
  if (session.flags.primitives) drawVocabulary(ctx, vocabulary);
  if (lastRecord) {
    drawPolyline(ctx, lastRecord.polyline);
    if (session.flags.canonization) {
      drawCanonization(ctx, lastRecord.response.canonized, vocabulary);
    }
    const pair = lastRecord.response.worst_pair;
    if (session.flags.worstPair && pair) drawWorstPair(ctx, pair);
  }
  drawPolyline(ctx, session.polyline);
}

function renderVerdicts(record: ProbeRecord): void {
  verdicts.replaceChildren(
    ...scoreboard(record.response).map((line) => {
      const row = document.createElement("div");
      row.className = "verdict-row";
      const badge = document.createElement("span");
      badge.className = `badge ${line.verdict === "NOVEL" ? "novel" : "ok"}`;
      badge.textContent = line.verdict;
      const text = document.createElement("span");
      text.textContent = `${line.label}: ${line.value} `;
      row.append(text, badge);
      return row;
    }),
  );
}

function renderHistory(): void {
  historyList.replaceChildren(
    ...session.history.map((record, i) => {
      const item = document.createElement("li");
      const novel =
        record.response.novel1 || record.response.novel2 === true;
      item.textContent = `probe ${i + 1}: ${record.polyline.length} points — `;
      const badge = document.createElement("span");
      badge.className = `badge ${novel ? "novel" : "ok"}`;
      badge.textContent = novel ? "NOVEL" : "normal";
      item.append(badge);
      item.addEventListener("click", () => {
        lastRecord = record;
        redraw();
        renderVerdicts(record);
      });
      return item;
    }),
  );
}

canvas.addEventListener("click", (event) => {
  const rect = canvas.getBoundingClientRect();
  session.addClick(event.clientX - rect.left, event.clientY - rect.top);
  hideBanner();
  redraw();
});

clearButton.addEventListener("click", () => {
  session.clearCurrent();
  hideBanner();
  redraw();
});

submitButton.addEventListener("click", async () => {
  const blocked = session.submitBlockReason();
  if (blocked) {
    showBanner(blocked);
    return;
  }
  if (inFlight) return;
  inFlight = true;
  submitButton.disabled = true;
  try {
    const response = await client.score(session.polyline);
    lastRecord = session.record(response);
    session.clearCurrent();
    hideBanner();
    renderVerdicts(lastRecord);
    renderHistory();
    redraw();
  } catch (err) {
    if (err instanceof TrackTooShort) {
      showBanner(`track too short: ${err.message}`);
    } else if (err instanceof ServiceUnreachable) {
      showBanner(err.message);
    } else {
      showBanner(String(err));
    }
  } finally {
    inFlight = false;
    submitButton.disabled = false;
  }
});

for (const flag of ["primitives", "canonization", "worstPair"] as const) {
  const box = document.getElementById(`flag-${flag}`) as HTMLInputElement;
  box.checked = session.flags[flag];
  box.addEventListener("change", () => {
    session.toggle(flag);
    redraw();
  });
}

async function boot(): Promise<void> {
  try {
    const [meta, prims] = await Promise.all([client.meta(), client.primitives(1)]);
    vocabulary = prims.primitives;
    const info = document.getElementById("model-info")!;
    info.textContent =
      `scales ${meta.scales.join(", ")} px — ` +
      `${prims.primitives.length} primitives at the smallest scale`;
  } catch (err) {
    showBanner(err instanceof Error ? err.message : String(err));
    return;
  }
  sceneImage = new Image();
  sceneImage.onload = () => {
    canvas.width = sceneImage!.naturalWidth;
    canvas.height = sceneImage!.naturalHeight;
    redraw();
  };
  sceneImage.onerror = () => {
    canvas.width = 800;
    canvas.height = 600;
    sceneImage = null;
    redraw();
  };
  sceneImage.src = client.sceneUrl();
}

void boot();
