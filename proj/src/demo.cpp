/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#include "sqlrl/demo.hpp"

#include "sqlrl/error.hpp"
#include "sqlrl/eval.hpp"
#include "sqlrl/reward.hpp"

namespace sqlrl::demo {

namespace {

struct DatabaseSpec {
    const char* name;
    const char* script;
};

// clang-format off
constexpr DatabaseSpec kDatabases[] = {
    {"school", R"(
CREATE TABLE students (id INTEGER PRIMARY KEY, name TEXT NOT NULL, grade INTEGER, city TEXT);
CREATE TABLE scores (student_id INTEGER REFERENCES students(id), subject TEXT, score REAL);
INSERT INTO students VALUES (1,'Ava',9,'Alameda'),(2,'Ben',10,'Oakland'),(3,'Cleo',9,'Alameda'),(4,'Dan',11,'Berkeley'),(5,'Eve',10,'Oakland');
INSERT INTO scores VALUES (1,'math',91),(1,'art',78),(2,'math',67),(3,'math',88),(3,'art',95),(4,'math',72),(5,'art',81),(5,'math',99);
)"},
    {"shop", R"(
CREATE TABLE products (id INTEGER PRIMARY KEY, name TEXT, category TEXT, price REAL);
CREATE TABLE orders (id INTEGER PRIMARY KEY, product_id INTEGER REFERENCES products(id), quantity INTEGER, month TEXT);
INSERT INTO products VALUES (1,'kettle','kitchen',25.0),(2,'pan','kitchen',40.0),(3,'lamp','living',55.5),(4,'rug','living',120.0),(5,'mug','kitchen',6.5);
INSERT INTO orders VALUES (1,1,2,'jan'),(2,3,1,'jan'),(3,5,10,'feb'),(4,2,1,'feb'),(5,4,1,'mar'),(6,5,4,'mar'),(7,1,1,'mar');
)"},
    {"library", R"(
CREATE TABLE books (id INTEGER PRIMARY KEY, title TEXT, author TEXT, year INTEGER);
CREATE TABLE loans (book_id INTEGER REFERENCES books(id), member TEXT, days INTEGER);
INSERT INTO books VALUES (1,'Dune','Herbert',1965),(2,'Emma','Austen',1815),(3,'Persuasion','Austen',1817),(4,'Ubik','Dick',1969),(5,'Solaris','Lem',1961);
INSERT INTO loans VALUES (1,'kim',14),(2,'lee',7),(2,'kim',21),(4,'ola',3),(5,'lee',10),(1,'ola',30);
)"},
    {"flights", R"(
CREATE TABLE airports (code TEXT PRIMARY KEY, city TEXT, country TEXT);
CREATE TABLE flights (id INTEGER PRIMARY KEY, origin TEXT REFERENCES airports(code), dest TEXT REFERENCES airports(code), minutes INTEGER);
INSERT INTO airports VALUES ('SFO','San Francisco','US'),('JFK','New York','US'),('LHR','London','UK'),('CDG','Paris','FR');
INSERT INTO flights VALUES (1,'SFO','JFK',330),(2,'JFK','LHR',415),(3,'LHR','CDG',75),(4,'SFO','LHR',610),(5,'CDG','JFK',500),(6,'JFK','SFO',375);
)"},
    {"company", R"(
CREATE TABLE departments (name TEXT PRIMARY KEY, floor INTEGER);
CREATE TABLE staff (id INTEGER PRIMARY KEY, name TEXT, dept TEXT REFERENCES departments(name), salary INTEGER);
INSERT INTO departments VALUES ('eng',3),('sales',1),('ops',2);
INSERT INTO staff VALUES (1,'Ira','eng',120),(2,'Jo','eng',135),(3,'Kai','sales',90),(4,'Liv','ops',95),(5,'Max','sales',88),(6,'Noa','eng',110);
)"},
};

struct PromptSpec {
    int database;
    const char* id;
    const char* question;
    const char* evidence;
    const char* gold;
    const char* equivalent;
    const char* wrong_a;
    const char* wrong_b;
    const char* broken;
    bool starts_correct;
};

constexpr PromptSpec kPrompts[] = {
    {0, "school-1", "Which students live in Alameda?", nullptr,
     "SELECT name FROM students WHERE city = 'Alameda'",
     "SELECT s.name FROM students AS s WHERE s.city LIKE 'Alameda' ORDER BY s.id",
     "SELECT name, city FROM students WHERE city = 'Alameda'",
     "SELECT name FROM students WHERE city = 'alameda'",
     "SELECT name FROM students WHER city = 'Alameda'", false},
    {0, "school-2", "What is the highest math score?", nullptr,
     "SELECT MAX(score) FROM scores WHERE subject = 'math'",
     "SELECT score FROM scores WHERE subject = 'math' ORDER BY score DESC LIMIT 1",
     "SELECT MAX(score) FROM scores",
     "SELECT AVG(score) FROM scores WHERE subject = 'math'",
     "SELECT MAX(score FROM scores WHERE subject = 'math'", true},
    {1, "shop-1", "How many kitchen products are there?", "kitchen refers to category = 'kitchen'",
     "SELECT COUNT(*) FROM products WHERE category = 'kitchen'",
     "SELECT COUNT(id) FROM products WHERE category IN ('kitchen')",
     "SELECT COUNT(*) FROM products",
     "SELECT SUM(price) FROM products WHERE category = 'kitchen'",
     "SELECT COUNT(*) FROM product WHERE category = 'kitchen'", false},
    {1, "shop-2", "Which products were ordered in March?", nullptr,
     "SELECT DISTINCT p.name FROM products p JOIN orders o ON o.product_id = p.id WHERE o.month = 'mar'",
     "SELECT name FROM products WHERE id IN (SELECT product_id FROM orders WHERE month = 'mar')",
     "SELECT p.name FROM products p JOIN orders o ON o.product_id = p.id WHERE o.month = 'feb'",
     "SELECT name FROM products WHERE price > 20",
     "SELECT name FROM products JOIN orders ON WHERE month = 'mar'", false},
    {2, "library-1", "List the titles written by Austen.", nullptr,
     "SELECT title FROM books WHERE author = 'Austen'",
     "SELECT title FROM books WHERE author = 'Austen' ORDER BY year DESC",
     "SELECT title, year FROM books WHERE author = 'Austen'",
     "SELECT title FROM books WHERE year < 1900 AND author <> 'Austen'",
     "SELECT title FROM books WHERE author = \"Austen", false},
    {2, "library-2", "What is the total number of loan days for Dune?", "Dune refers to title = 'Dune'",
     "SELECT SUM(l.days) FROM loans l JOIN books b ON b.id = l.book_id WHERE b.title = 'Dune'",
     "SELECT SUM(days) FROM loans WHERE book_id = (SELECT id FROM books WHERE title = 'Dune')",
     "SELECT COUNT(*) FROM loans l JOIN books b ON b.id = l.book_id WHERE b.title = 'Dune'",
     "SELECT MAX(l.days) FROM loans l JOIN books b ON b.id = l.book_id WHERE b.title = 'Dune'",
     "SELECT SUM(days) FROM loans JOIN books WHERE", true},
    {3, "flights-1", "Which cities have flights departing to London?", "London refers to city = 'London'",
     "SELECT DISTINCT a.city FROM flights f JOIN airports a ON a.code = f.origin WHERE f.dest = 'LHR'",
     "SELECT city FROM airports WHERE code IN (SELECT origin FROM flights WHERE dest = (SELECT code FROM airports WHERE city = 'London'))",
     "SELECT DISTINCT f.origin FROM flights f WHERE f.dest = 'LHR'",
     "SELECT DISTINCT a.city FROM flights f JOIN airports a ON a.code = f.dest WHERE f.origin = 'LHR'",
     "SELECT city FROM airports a JOIN flights f ON a.code = f.origin WHERE dest = LHR", false},
    {3, "flights-2", "What is the longest flight time in minutes?", nullptr,
     "SELECT MAX(minutes) FROM flights",
     "SELECT minutes FROM flights ORDER BY minutes DESC LIMIT 1",
     "SELECT MIN(minutes) FROM flights",
     "SELECT AVG(minutes) FROM flights",
     "SELECT MAX(minutes) FROM flight", false},
    {4, "company-1", "Who earns more than 100 in engineering?", "engineering refers to dept = 'eng'",
     "SELECT name FROM staff WHERE dept = 'eng' AND salary > 100",
     "SELECT name FROM staff WHERE salary > 100 AND dept = 'eng' ORDER BY name",
     "SELECT name FROM staff WHERE salary > 100",
     "SELECT name FROM staff WHERE dept = 'eng' AND salary > 115",
     "SELECT name FROM staff WHERE dept = 'eng' AND salary >", true},
    {4, "company-2", "Which floor is the sales department on?", nullptr,
     "SELECT floor FROM departments WHERE name = 'sales'",
     "SELECT d.floor FROM departments d WHERE d.name IN (SELECT dept FROM staff WHERE dept = 'sales')",
     "SELECT floor FROM departments",
     "SELECT name, floor FROM departments WHERE name = 'sales'",
     "SELECT floor FROM departments WHERE name = sales", false},
};
// clang-format on

std::string answer(const std::string& reasoning, const std::string& sql)
{
    return "<think>\n" + reasoning + "\n</think>\n<answer>\n```sql\n" + sql + "\n```\n</answer>";
}

double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

} // namespace

std::vector<DemoPrompt> build_corpus(const std::filesystem::path& dir)
{
    std::vector<DatabaseRef> dbs;
    for (const auto& spec : kDatabases) {
        auto db = create_database(dir / (std::string(spec.name) + ".sqlite"));
        const auto outcomes = execute_script(db, split_statements(spec.script));
        if (outcomes.empty() || !outcomes.back().ok()) {
            throw Error(ErrorKind::InvalidInput, std::string("cannot build demo database ") + spec.name);
        }
        dbs.push_back(db.readonly());
    }

    std::vector<DemoPrompt> corpus;
    for (const auto& p : kPrompts) {
        DemoPrompt d;
        d.sample.id = p.id;
        d.sample.question = p.question;
        if (p.evidence) d.sample.evidence = p.evidence;
        d.sample.db = dbs[static_cast<std::size_t>(p.database)];
        d.sample.gold_sql = p.gold;
        d.pool = {
            answer("The question maps directly onto one table.", p.gold),
            answer("Restating the filter another way.", p.equivalent),
            answer("Selecting the obvious columns.", p.wrong_a),
            answer("Using a related condition.", p.wrong_b),
            answer("Writing the query quickly.", p.broken),
            "<think>\nNot sure which table holds this.\n</think>\n<answer>\nI cannot determine the query.\n</answer>",
        };
        // Start from a policy that prefers a wrong answer on most prompts.
        d.initial_logits = p.starts_correct ? std::vector<double>{1.0, 0.0, 0.6, 0.2, 0.1, -0.5}
                                            : std::vector<double>{-0.4, -0.8, 1.0, 0.5, 0.3, 0.2};
        corpus.push_back(std::move(d));
    }
    return corpus;
}

grpo::ToyPolicy initial_policy(const std::vector<DemoPrompt>& corpus, double temperature)
{
    std::vector<grpo::PromptPool> pools;
    for (const auto& d : corpus) pools.push_back({d.sample.id, d.pool, d.initial_logits});
    return grpo::ToyPolicy(std::move(pools), temperature);
}

double greedy_ex(const grpo::ToyPolicy& policy, const std::vector<DemoPrompt>& corpus, int threads)
{
    std::vector<Sample> samples;
    std::vector<ModelOutput> predictions;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        samples.push_back(corpus[i].sample);
        predictions.push_back({corpus[i].pool[policy.greedy(i)]});
    }
    return eval::execution_accuracy(samples, predictions, {}, threads).ex_percent;
}

std::vector<grpo::RolloutGroup> sample_groups(const grpo::ToyPolicy& policy, const grpo::ToyPolicy& reference,
                                              const std::vector<DemoPrompt>& corpus, int group_size, SplitMix64& rng,
                                              int threads)
{
    std::vector<grpo::RolloutGroup> groups(corpus.size());
    for (std::size_t p = 0; p < corpus.size(); ++p) {
        const auto logp = policy.log_probabilities(p);
        const auto logp_ref = reference.log_probabilities(p);
        auto& g = groups[p];
        g.prompt_id = corpus[p].sample.id;
        for (int i = 0; i < group_size; ++i) {
            const auto c = policy.sample(p, rng);
            g.candidates.push_back(corpus[p].pool[c]);
            g.logp_current.push_back(logp[c]);
            g.logp_old.push_back(logp[c]);
            g.logp_ref.push_back(logp_ref[c]);
        }
    }
    for (std::size_t p = 0; p < corpus.size(); ++p) {
        std::vector<ModelOutput> outputs;
        for (const auto& c : groups[p].candidates) outputs.push_back({c});
        for (const auto& r : score_group(outputs, corpus[p].sample.gold_sql, corpus[p].sample.db, {}, threads)) {
            groups[p].rewards.push_back(r.value);
        }
    }
    return groups;
}

DemoResult run(const std::vector<DemoPrompt>& corpus, const DemoOptions& options)
{
    options.config.validate();
    if (options.steps < 0) throw Error(ErrorKind::InvalidConfig, "steps must be non-negative");
    if (options.epoch_steps < 1) throw Error(ErrorKind::InvalidConfig, "epoch_steps must be positive");

    const auto reference = initial_policy(corpus, options.config.temperature);
    auto policy = reference;
    SplitMix64 rng(options.seed);

    DemoResult result;
    result.initial_ex = greedy_ex(policy, corpus, options.threads);
    result.final_ex = result.initial_ex;
    if (result.initial_ex == 100.0) result.first_perfect_step = 0;

    std::vector<grpo::RolloutGroup> groups;
    for (int step = 1; step <= options.steps; ++step) {
        const bool refresh = options.mode == Mode::Online || (step - 1) % options.epoch_steps == 0;
        if (refresh) groups = sample_groups(policy, reference, corpus, options.config.group_size, rng, options.threads);

        StepRecord record;
        record.step = step;
        std::vector<double> all_rewards;
        for (const auto& g : groups) all_rewards.insert(all_rewards.end(), g.rewards.begin(), g.rewards.end());
        record.mean_reward = mean(all_rewards);
        record.objective = grpo::toy_objective(policy, groups, options.config);

        policy = grpo::toy_policy_step(policy, groups, options.config, options.learning_rate, options.threads);
        record.greedy_ex = greedy_ex(policy, corpus, options.threads);
        result.final_ex = record.greedy_ex;
        if (!result.first_perfect_step && record.greedy_ex == 100.0) result.first_perfect_step = step;
        result.steps.push_back(record);
    }
    result.final_policy = policy;
    return result;
}

std::string DemoResult::trajectory_jsonl() const
{
    std::string out;
    out += nlohmann::json{{"type", "start"}, {"greedy_ex", initial_ex}}.dump() + "\n";
    for (const auto& s : steps) {
        out += nlohmann::json{{"type", "step"},
                              {"step", s.step},
                              {"mean_reward", s.mean_reward},
                              {"objective", s.objective},
                              {"greedy_ex", s.greedy_ex}}
                   .dump() +
               "\n";
    }
    nlohmann::json summary{{"type", "summary"}, {"initial_ex", initial_ex}, {"final_ex", final_ex}};
    summary["first_perfect_step"] = first_perfect_step ? nlohmann::json(*first_perfect_step) : nlohmann::json(nullptr);
    out += summary.dump() + "\n";
    return out;
}

} // namespace sqlrl::demo
