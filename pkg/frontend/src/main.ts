import { GatewayClient } from "./api.js";
import { filterFromParams, filterToParams } from "./filters.js";
import { ExplorerView } from "./views/explorer.js";
import { HistoryView } from "./views/history.js";
import { SubmitView } from "./views/submit.js";

type TabName = "submit" | "explore" | "history";

const TABS: readonly { name: TabName; label: string }[] = [
    { name: "submit", label: "Run analysis" },
    { name: "explore", label: "Detections" },
    { name: "history", label: "History" },
];

const app = document.getElementById("app")!;
app.innerHTML = `
    <header class="masthead">
        <h1>smellhunter</h1>
        <nav class="tabs">
            ${TABS.map(
                (tab) =>
                    `<button type="button" data-tab="${tab.name}">${tab.label}</button>`
            ).join("")}
        </nav>
    </header>
    <main class="panel-slot"></main>
`;

const gateway = new GatewayClient("");
const submit = new SubmitView(gateway);
const history = new HistoryView(gateway);
const explorer = new ExplorerView(gateway, {
    onFilterChange: (filter) => {
        const query = filterToParams(filter).toString();
        window.history.replaceState(null, "", query ? `#explore?${query}` : "#explore");
    },
});
const panels: Record<TabName, HTMLElement> = {
    submit: submit.element,
    explore: explorer.element,
    history: history.element,
};

const slot = app.querySelector(".panel-slot") as HTMLElement;

function parseHash(): { tab: TabName; query: URLSearchParams } {
    const raw = window.location.hash.replace(/^#/, "");
    const [head, tail] = raw.split("?", 2);
    const tab = (["submit", "explore", "history"] as const).find(
        (name) => name === head
    );
    return { tab: tab ?? "submit", query: new URLSearchParams(tail ?? "") };
}

function showTab(tab: TabName): void {
    slot.textContent = "";
    slot.appendChild(panels[tab]);
    for (const button of app.querySelectorAll(".tabs button")) {
        button.classList.toggle(
            "active",
            (button as HTMLElement).dataset.tab === tab
        );
    }
    if (tab === "explore") {
        void explorer.refresh();
    } else if (tab === "history") {
        void history.refresh();
    }
}

function applyHash(): void {
    const { tab, query } = parseHash();
    if (tab === "explore") {
        explorer.setFilter(filterFromParams(query));
    }
    showTab(tab);
}

for (const button of app.querySelectorAll(".tabs button")) {
    button.addEventListener("click", () => {
        const tab = (button as HTMLElement).dataset.tab as TabName;
        const query =
            tab === "explore" ? filterToParams(explorer.filter).toString() : "";
        window.history.replaceState(
            null,
            "",
            query ? `#${tab}?${query}` : `#${tab}`
        );
        showTab(tab);
    });
}

window.addEventListener("hashchange", applyHash);
applyHash();
