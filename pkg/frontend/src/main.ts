/** DOM wiring for the explorer: controls -> debounced rate requests -> views.
 *
 * All views re-render atomically from the single latest bundle; superseded
 * responses are discarded by the client.
 */

import { ApiError, RateClient } from "./api.js";
import { renderBestTable, renderDistributions } from "./charts.js";
import { debounce } from "./debounce.js";
import {
  buildRateRequest,
  controlsError,
  stateFromBundle,
  validateBins,
  type ExplorerState,
} from "./state.js";
import { renderScatterSvg, scatterFromBundle } from "./scatter.js";
import type { Bundle, ScatterSeries } from "./types.js";

const REFRESH_DEBOUNCE_MS = 250;

const $ = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
};

class Explorer {
  private client = new RateClient();
  private state!: ExplorerState;
  private bundle!: Bundle;
  private xKey = "power_draw";
  private yKey = "f1_score";
  private selectedLabel: string | null = null;
  private refresh = debounce(() => void this.requestRate(), REFRESH_DEBOUNCE_MS);

  async boot() {
    // empty body selects the server's default scheme
    const response = await fetch("/api/rate", { method: "POST" });
    this.bundle = (await response.json()) as Bundle;
    this.state = stateFromBundle(this.bundle);
    this.buildControls();
    this.renderAll();
  }

  private setError(message: string | null) {
    const node = $("error");
    node.textContent = message ?? "";
    node.classList.toggle("visible", message !== null);
  }

  private async requestRate() {
    const problem = controlsError(this.state);
    if (problem) {
      this.setError(problem);
      return; // invalid controls: no request leaves the browser
    }
    try {
      const bundle = await this.client.rate(buildRateRequest(this.state));
      if (bundle === null) {
        return; // superseded by a newer request
      }
      this.bundle = bundle;
      this.setError(null);
      this.renderAll();
    } catch (error) {
      this.setError(error instanceof ApiError ? error.message : String(error));
    }
  }

  private buildControls() {
    const sliders = $("sliders");
    sliders.innerHTML = "";
    for (const metric of this.bundle.scheme.metrics) {
      if (metric.weight <= 0) {
        continue;
      }
      const row = document.createElement("label");
      row.className = "slider-row";
      const name = document.createElement("span");
      name.textContent = `${metric.display_name} (${metric.group})`;
      const value = document.createElement("output");
      const input = document.createElement("input");
      input.type = "range";
      input.min = "0.05";
      input.max = "3";
      input.step = "0.05";
      input.value = String(this.state.weights[metric.key]);
      value.value = Number(this.state.weights[metric.key]).toFixed(2);
      input.addEventListener("input", () => {
        this.state.weights[metric.key] = Number(input.value);
        value.value = Number(input.value).toFixed(2);
        this.refresh.call();
      });
      row.append(name, input, value);
      sliders.append(row);
    }

    const bins = $("bins");
    bins.innerHTML = "";
    this.state.bins.forEach((boundary, i) => {
      const input = document.createElement("input");
      input.type = "number";
      input.step = "0.01";
      input.value = boundary.toFixed(4);
      input.addEventListener("input", () => {
        this.state.bins[i] = Number(input.value);
        const problem = validateBins(this.state.bins);
        this.setError(problem);
        if (!problem) {
          this.refresh.call();
        }
      });
      bins.append(input);
    });

    const refs = $("references");
    refs.innerHTML = "";
    for (const binding of this.state.references) {
      const row = document.createElement("label");
      row.className = "ref-row";
      const name = document.createElement("span");
      name.textContent = `${binding.dataset} @ ${binding.environment}`;
      const select = document.createElement("select");
      for (const entry of this.bundle.experiments) {
        if (
          entry.task === binding.task &&
          entry.dataset === binding.dataset &&
          entry.environment === binding.environment
        ) {
          const option = document.createElement("option");
          option.value = entry.id;
          option.textContent = entry.method;
          option.selected = entry.id === binding.experiment;
          select.append(option);
        }
      }
      select.addEventListener("change", () => {
        binding.experiment = select.value;
        this.refresh.call();
      });
      row.append(name, select);
      refs.append(row);
    }

    const axisY = $("axis-y") as HTMLSelectElement;
    axisY.innerHTML = "";
    for (const metric of this.bundle.scheme.metrics) {
      const option = document.createElement("option");
      option.value = metric.key;
      option.textContent = metric.display_name;
      option.selected = metric.key === this.yKey;
      axisY.append(option);
    }
    axisY.addEventListener("change", () => {
      this.yKey = axisY.value;
      this.renderAll();
    });

    this.buildFilters();
  }

  private buildFilters() {
    const fill = (
      id: string,
      values: string[],
      all: string,
      apply: (value: string | null) => void,
    ) => {
      const filter = $(id) as HTMLSelectElement;
      filter.innerHTML = `<option value=''>${all}</option>`;
      for (const value of values) {
        const option = document.createElement("option");
        option.value = value;
        option.textContent = value;
        filter.append(option);
      }
      filter.addEventListener("change", () => {
        apply(filter.value || null);
        this.renderAll();
      });
    };
    fill(
      "dataset-filter",
      [...new Set(this.bundle.experiments.map((e) => e.dataset))].sort(),
      "all datasets",
      (value) => (this.state.datasetFilter = value),
    );
    fill(
      "environment-filter",
      [...new Set(this.bundle.experiments.map((e) => e.environment))].sort(),
      "all environments",
      (value) => (this.state.environmentFilter = value),
    );
  }

  private filteredScatter(): ScatterSeries {
    const series = scatterFromBundle(this.bundle, this.xKey, this.yKey);
    const { datasetFilter, environmentFilter } = this.state;
    return {
      ...series,
      points: series.points.filter(
        (p) =>
          (datasetFilter === null || p.dataset === datasetFilter) &&
          (environmentFilter === null || p.environment === environmentFilter),
      ),
    };
  }

  private renderAll() {
    $("scatter").innerHTML = renderScatterSvg(this.filteredScatter());
    $("dist-datasets").innerHTML = renderDistributions(this.bundle.distributions.by_dataset);
    $("dist-methods").innerHTML = renderDistributions(this.bundle.distributions.by_method);
    $("best").innerHTML = renderBestTable(this.bundle.best_per_dataset, [
      this.xKey,
      this.yKey,
    ]);
    $("scheme-hash").textContent = this.bundle.scheme_hash.slice(0, 12);
    this.wireLabelLinks();
    if (this.selectedLabel) {
      void this.showLabel(this.selectedLabel); // refetch under the new scheme hash
    }
  }

  private wireLabelLinks() {
    for (const node of document.querySelectorAll<SVGGElement>("#scatter g.point")) {
      node.addEventListener("click", () => void this.showLabel(node.dataset.id ?? ""));
    }
    for (const node of document.querySelectorAll<HTMLTableRowElement>("#best tr[data-experiment]")) {
      node.addEventListener("click", () =>
        void this.showLabel(node.dataset.experiment ?? ""),
      );
    }
  }

  private async showLabel(experimentId: string) {
    if (!experimentId) {
      return;
    }
    this.selectedLabel = experimentId;
    try {
      const svg = await this.client.label(experimentId, this.bundle.scheme_hash);
      $("label-panel").innerHTML = svg;
    } catch (error) {
      $("label-panel").textContent =
        error instanceof ApiError && error.status === 404
          ? "experiment not found"
          : String(error);
    }
  }
}

new Explorer().boot().catch((error) => {
  document.body.textContent = `failed to load corpus: ${error}`;
});
