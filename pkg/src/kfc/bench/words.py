"""Fixed word pools for synthetic corpora. Order matters: changing it changes every corpus."""

BUSINESS = """
account accounting accrual acquisition actuary adjustment administration advertising advisor
agency agenda agreement allocation allowance amortization analyst annual annuity applicant
appraisal approval arbitration arrears asset assets assurance audit auditor authorization
backlog balance bank bankruptcy bargain baseline benchmark beneficiary benefit bid billing
board bond bonus bookkeeping borrower boutique brand branding breakeven broker brokerage
budget bulletin bureau business buyer buyout campaign capital capitalization career cash
cashflow catalog category chairman channel charter chief claim client clientele closing
collateral commerce commission commitment commodity company compensation competitor
compliance conglomerate consensus consignment consultant consumer contract contractor
controller corporate corporation cost costing counsel coupon coverage credit creditor
currency customer deadline dealer debit debt decision default deficit delegate delivery
demand department deposit depreciation deputy dispatch distribution distributor dividend
division downsizing due earnings economy efficiency employee employer employment endorsement
enterprise entrepreneur equity escrow estimate executive expansion expenditure expense
export facility factoring fee finance financial financing firm fiscal forecast franchise
freight fund funding gain goodwill governance grant gross growth guarantee headquarters
hedge hiring holding income incentive indemnity industry inflation insolvency installment
insurance interest inventory investment investor invoice issuer journal lease ledger
lender lending leverage liability license liquidation liquidity loan logistics loss
management manager mandate margin market marketing marketplace maturity meeting memo
merchandise merchant merger milestone minutes monopoly mortgage negotiation net networking
newsletter notary obligation offer office officer offshore onboarding operations
opportunity order organization outlay outsourcing overdraft overhead owner ownership
partner partnership patent payable payment payroll penalty pension performance permit
personnel pipeline policy portfolio premium presentation president price pricing principal
procurement product production productivity profit profitability projection promotion
proposal prospect prospectus purchase purchasing quarter quarterly quota quotation rate
ratio rebate receipt receivable recession recruitment refund region regulation regulator
reimbursement remittance rent renewal report representative requisition reserve resignation
retail retailer retention return revenue review risk royalty salary sale sales salesperson
savings schedule sector securities security seller settlement shareholder shares shipment
shipping sourcing sponsor staff stakeholder statement stock stockholder strategy subsidiary
subsidy supervisor supplier supply surplus tariff tax taxation tender term territory
trade trademark trader trading training transaction transfer treasury trend trustee
turnover underwriter underwriting valuation value vendor venture voucher wage warehouse
warranty wealth wholesale wholesaler workforce workload yield acumen affiliate alliance
appointment assessment auction authority barter brochure certificate checkout clearance
coalition commerce committee competency conference contingency cooperative courier
creditworthiness customs declaration delegation demographic directive discount diversification
downturn duty economics endowment entitlement estate exchange exemption exposure fiduciary
forfeiture freelance frontline fulfillment headcount incorporation infrastructure
inheritance initiative inspection intermediary itinerary jurisdiction leadership leasing
levy lien litigation lobbying markup memorandum merchandising mission monetary negotiator
niche objective occupancy oversight patronage phase pledge premises procurement prospecting
provision proxy purchaser receivership reconciliation referral registration reinsurance
relocation reporting reputation requirement reseller resolution restructuring revaluation
rollout scheme seasonal segment severance signatory solvency specialist stipend storefront
subcontractor subscription succession summit surcharge survey syndicate takeover target
telemarketing tenancy tenant testimonial threshold timeline tranche transit treasurer
tuition upsell utility vacancy verification viability visibility waiver wholesale
workflow workshop worksheet
""".split()
BUSINESS = list(dict.fromkeys(BUSINESS))

TECHNICAL = """
abstraction accelerator adapter address algorithm allocator analyzer api appliance
application architecture archive argument array assembler assertion asynchronous attribute
authentication backend backup bandwidth barrier binary binding bit bitmap bitrate block
bootloader bottleneck branch breakpoint broadcast buffer bug build bus byte cache callback
capacitor certificate channel checksum chipset cipher circuit class client clock cluster
codec compiler component compression computation concurrency configuration connector console
constant container controller coprocessor core counter cpu crash cryptography cursor daemon
dashboard database datagram deadlock debugger decoder decryption dependency deployment
descriptor device diagnostic dictionary digest directory disk dispatcher distribution dns
docker domain driver dynamic encoder encryption endpoint engine entropy enumeration
environment ethernet event exception executable execution expression extension failover
fault feature fiber field filesystem firewall firmware flag framework frequency function
gateway generator gigabyte git gpu gradient graph handler handshake hardware hash header
heap heuristic hexadecimal hierarchy host hostname hypervisor identifier implementation index
inference inheritance initializer inode input instance instruction integer integration
interface interpreter interrupt iteration iterator java javascript kernel key keyboard
label lambda latency layer library linker linux listener literal load loader localhost
lock log logic loop machine macro mainframe malware matrix megabyte memory metadata method
metric microcontroller middleware migration mirror model modem module monitor motherboard
multicast multiplexer mutex namespace network node null object opcode operand optimizer
oscillator output overflow package packet page pagination parameter parser partition patch
payload peripheral permission pipeline pixel platform plugin pointer polling port
processor profiler program protocol proxy python query queue radix ram recursion redundancy
refactor register regression relay release renderer replication repository request resistor
resolver resource response rollback router runtime sandbox scheduler schema script sdk
segment semaphore sensor serializer server service session shell signal simulation socket
software solver source specification sql stack statement storage stream string subnet
subroutine switch symbol synchronization syntax system tensor terabyte terminal thread
throughput timeout timestamp token topology trace transaction transistor tree tuple
unicode upload uptime variable vector version virtualization voltage volume webhook
widget wireless workload xml yaml zip accumulator aggregation allocation amplifier
anomaly antenna artifact backpressure baseband batch benchmark bitstream blob bridge
bytecode calibration canary capacitance cardinality checkpoint chunk classifier
codebase coherence collision commit compaction compositor conduit consensus constraint
converter coroutine crawler crossbar dataset deduplication defragmentation dereference
deserializer diode dispatch downlink embedding emulator encapsulation endianness
epoch escalation failback fanout fetch filter flash fork frame garbage geometry
hashing hotfix idempotency ingestion instrumentation invariant isolation jitter journal
keystore lattice lexer linearizability loopback mainline manifest marshalling memtable
microservice mnemonic modulation multithreading mutation netmask nonce normalization
notation offset orchestration overclock pagefile parity partitioning pathfinding
persistence pipelining polymorphism precision prefetch preprocessor provisioning
quantization quorum rasterizer rebase reconciler reducer refresh regex reindex rendering
replica resampling retry rewrite ringbuffer rotation sampling scalability scanner sharding
sideband singleton snapshot spinlock splitter staging subsystem superscalar swap
telemetry tessellation throttling tokenizer transcoder traversal truncation tunneling
uplink validator vectorization vertex watchdog wavelength websocket wildcard wrapper
""".split()
