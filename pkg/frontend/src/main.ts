/** DOM wiring: setup form -> labeling grid -> completion screen.
 *
 * Keyboard covers the whole loop: arrows / j / k move the focused card,
 * c marks change, n marks no-change, Enter submits when complete.
 */

import { ApiError, Client } from "./api.js";
import {
  budgetBarHtml,
  chartPoints,
  lineChartSvg,
  qGridHtml,
} from "./charts.js";
import { SessionModel, trainSizeOf, validateConfigForm } from "./model.js";
import { project, scatterSvg } from "./scatter.js";
import type { DisplayItem, PoolInfo } from "./types.js";

const client = new Client("..");
let model: SessionModel | null = null;
let pools: PoolInfo[] = [];
let focusIndex = 0;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function show(screen: "setup" | "label" | "done"): void {
  for (const name of ["setup", "label", "done"]) {
    el(`screen-${name}`).hidden = name !== screen;
  }
}

function banner(message: string | null, retry?: () => void): void {
  const box = el("banner");
  box.innerHTML = "";
  box.hidden = message === null;
  if (message === null) return;
  box.textContent = message;
  if (retry) {
    const btn = document.createElement("button");
    btn.textContent = "retry";
    btn.addEventListener("click", retry);
    box.appendChild(btn);
  }
}

// ---------------------------------------------------------------- setup

async function loadPools(): Promise<void> {
  banner(null);
  try {
    await client.health();
    pools = await client.listPools();
  } catch {
    banner("server unreachable", loadPools);
    return;
  }
  const select = el<HTMLSelectElement>("pool-select");
  select.innerHTML = "";
  for (const pool of pools) {
    const opt = document.createElement("option");
    opt.value = pool.pool_id;
    opt.textContent = `${pool.name} (${pool.n} items, d=${pool.d})`;
    select.appendChild(opt);
  }
  validateForm();
}

function formValues() {
  return {
    poolId: el<HTMLSelectElement>("pool-select").value,
    budgetFraction: parseFloat(el<HTMLInputElement>("budget-fraction").value),
    initialSize: parseInt(el<HTMLInputElement>("display-size").value, 10),
    strategy: el<HTMLSelectElement>("strategy-select").value,
    seed: parseInt(el<HTMLInputElement>("seed").value, 10) || 0,
  };
}

function validateForm(): boolean {
  const values = formValues();
  const pool = pools.find((p) => p.pool_id === values.poolId);
  const error = pool
    ? validateConfigForm(
        values.budgetFraction,
        values.initialSize,
        trainSizeOf(pool.n, pool.has_truth),
      )
    : "no pool selected";
  el("form-error").textContent = error ?? "";
  el<HTMLButtonElement>("start-btn").disabled = error !== null;
  return error === null;
}

async function startSession(): Promise<void> {
  if (!validateForm()) return;
  const values = formValues();
  banner(null);
  try {
    const created = await client.createSession(values.poolId, {
      strategy: values.strategy,
      budget_fraction: values.budgetFraction,
      display: { initial: values.initialSize },
      seed: values.seed,
    });
    model = new SessionModel(created);
    focusIndex = 0;
    show("label");
    render();
  } catch (err) {
    if (err instanceof ApiError) {
      el("form-error").textContent = String(err.detail);
    } else {
      banner("server unreachable", startSession);
    }
  }
}

// -------------------------------------------------------------- labeling

function cardHtml(item: DisplayItem, index: number): string {
  const label = model?.labelOf(item.id);
  const classes = ["card"];
  if (index === focusIndex) classes.push("focused");
  if (label === 1) classes.push("label-change");
  if (label === 0) classes.push("label-nochange");
  let body: string;
  if (item.image_urls) {
    body =
      `<div class="pair"><img src="${item.image_urls.before}" alt="before">` +
      `<img src="${item.image_urls.after}" alt="after"></div>`;
  } else {
    const points = project(
      (model?.display ?? [])
        .filter((it) => it.features)
        .map((it) => ({ id: it.id, features: it.features as number[] })),
    );
    body = scatterSvg(points, item.id);
  }
  const tag =
    label === undefined ? "&nbsp;" : label === 1 ? "change" : "no change";
  return (
    `<div class="${classes.join(" ")}" data-item="${item.id}" data-index="${index}">` +
    `<header>#${item.id}</header>${body}` +
    `<div class="choice">${tag}</div>` +
    `<div class="buttons">` +
    `<button data-label="1">change (c)</button>` +
    `<button data-label="0">no change (n)</button>` +
    `</div></div>`
  );
}

function render(): void {
  if (!model) return;
  el("grid").innerHTML = model.display
    .map((item, i) => cardHtml(item, i))
    .join("");
  el("progress").innerHTML =
    `<span>iteration ${model.iteration}</span>` +
    `<span>samp ${model.sampPct.toFixed(2)}%</span>` +
    budgetBarHtml(model.budget.used, model.budget.max_labels);
  el("chart-eer").innerHTML = lineChartSvg(
    chartPoints(model.history, "eer"),
    "test EER",
  );
  el("chart-reward").innerHTML = lineChartSvg(
    chartPoints(model.history, "reward"),
    "reward",
    "#16a34a",
  );
  el("chart-size").innerHTML = lineChartSvg(
    chartPoints(model.history, "display_size"),
    "display size",
    "#9333ea",
  );
  el("qgrid").innerHTML = qGridHtml(model.qValues);
  const submit = el<HTMLButtonElement>("submit-btn");
  submit.disabled = !model.canSubmit;
  el("submit-hint").textContent = model.canSubmit
    ? "Enter to submit"
    : `${model.labeledCount} / ${model.display.length} labeled`;
}

async function submit(): Promise<void> {
  if (!model || !model.canSubmit) return;
  banner(null);
  try {
    const resp = await client.submitLabels(model.sessionId, model.payload());
    model.applyLabelResponse(resp);
    const status = await client.status(model.sessionId);
    model.applyStatusExtras(status);
    focusIndex = 0;
    if (model.done) {
      await renderDone();
    } else {
      render();
    }
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      await resync();
      banner("display was out of sync with the server; reloaded");
    } else if (err instanceof ApiError && err.status === 410) {
      await renderDone();
    } else {
      banner("submission failed; server unreachable?", submit);
    }
  }
}

async function resync(): Promise<void> {
  if (!model) return;
  const status = await client.status(model.sessionId);
  model.resyncFromStatus(status);
  if (model.done) {
    await renderDone();
  } else {
    show("label");
    render();
  }
}

// ------------------------------------------------------------ completion

async function renderDone(): Promise<void> {
  if (!model) return;
  show("done");
  const log = await client.runlog(model.sessionId);
  const blob = new Blob([log], { type: "application/jsonl" });
  const link = el<HTMLAnchorElement>("runlog-link");
  link.href = URL.createObjectURL(blob);
  link.download = `runlog-${model.sessionId}.jsonl`;
  el("done-summary").textContent =
    `${model.history.length} iterations, ` +
    `${model.budget.used} labels spent (samp ${model.sampPct.toFixed(2)}%)`;
  el("done-chart").innerHTML = lineChartSvg(
    chartPoints(model.history, "eer"),
    "test EER",
  );
}

// -------------------------------------------------------------- keyboard

function onKey(event: KeyboardEvent): void {
  if (!model || el("screen-label").hidden) return;
  const n = model.display.length;
  if (n === 0) return;
  switch (event.key) {
    case "ArrowRight":
    case "j":
      focusIndex = (focusIndex + 1) % n;
      break;
    case "ArrowLeft":
    case "k":
      focusIndex = (focusIndex - 1 + n) % n;
      break;
    case "c":
      model.setLabel(model.display[focusIndex].id, 1);
      focusIndex = Math.min(focusIndex + 1, n - 1);
      break;
    case "n":
    case "x":
      model.setLabel(model.display[focusIndex].id, 0);
      focusIndex = Math.min(focusIndex + 1, n - 1);
      break;
    case "Enter":
      void submit();
      return;
    default:
      return;
  }
  event.preventDefault();
  render();
}

// ---------------------------------------------------------------- wiring

export function init(): void {
  void loadPools();
  el("reload-pools").addEventListener("click", () => void loadPools());
  el("start-btn").addEventListener("click", () => void startSession());
  for (const id of ["budget-fraction", "display-size", "pool-select"]) {
    el(id).addEventListener("input", validateForm);
  }
  el("grid").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const card = target.closest<HTMLElement>(".card");
    if (!card || !model) return;
    focusIndex = parseInt(card.dataset.index ?? "0", 10);
    const label = target.dataset.label;
    if (label !== undefined) {
      model.setLabel(parseInt(card.dataset.item ?? "0", 10), label === "1" ? 1 : 0);
    }
    render();
  });
  el("submit-btn").addEventListener("click", () => void submit());
  document.addEventListener("keydown", onKey);
  window.addEventListener("focus", () => {
    if (model && !el("screen-label").hidden) void resync();
  });
}

init();
